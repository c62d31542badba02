#include "refract/occupation.hpp"

#include <algorithm>
#include <cmath>

#include "refract/errors.hpp"
#include "refract/quadrature.hpp"

namespace refract {

namespace {

// lambda E[g(M)] for the jump law, adaptive over m in (0, inf).
QuadResult law_expectation(const JumpSpec& jumps, const std::function<double(double)>& g,
                           std::vector<double> breaks, double tol) {
    QuadResult r;
    if (!jumps.has_jumps()) return r;
    const double lam = jumps.rate();
    const JumpLaw& law = jumps.law();
    if (auto s = law.atom()) {
        r.value = lam * g(*s);
        r.evaluations = 1;
        return r;
    }
    breaks.push_back(0.0);
    breaks.push_back(kInf);
    std::sort(breaks.begin(), breaks.end());
    std::vector<double> pts;
    for (double b : breaks) {
        if (!(b >= 0.0)) continue;
        if (pts.empty() || b > pts.back()) pts.push_back(b);
    }
    QuadOptions o;
    o.abs_tol = tol / lam;
    r = integrate_pieces([&](double m) { return law.pdf(m) * g(m); }, pts, o);
    r.value *= lam;
    r.error *= lam;
    return r;
}

// int_a^b f with break points clipped to (a, b).
double inner_integral(const std::function<double(double)>& f, double a, double b, const std::vector<double>& breaks,
                      double tol) {
    if (!(b > a)) return 0.0;
    std::vector<double> pts{a};
    for (double p : breaks)
        if (p > a && p < b) pts.push_back(p);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    QuadOptions o;
    o.abs_tol = tol;
    return integrate_pieces(f, pts, o).value;
}

double positive_part_drift(const RefractedModel& rm) {
    return std::max(psi_prime_at_zero(rm.x()) - rm.delta(), 0.0);
}

LaplaceResult assemble(const KernelContext& k, const LtOptions& opts) {
    const RefractedModel& rm = k.model();
    const LevyModel& x = rm.x();
    const JumpSpec& jumps = x.jumps();
    const double L = k.below(), H = k.above();
    const double phi0 = k.phi0();
    const double sigma_half = 0.5 * x.sigma2();
    const double dplus = positive_part_drift(rm);
    const double inner_tol = opts.tol / 10.0;

    double num = std::isfinite(H) ? k.y_set().w_reciprocal(H) : dplus;
    double den = dplus;
    double err = 0.0;
    if (sigma_half > 0.0) {
        num += sigma_half * kernel_C(k);
        den += sigma_half * kernel_D(k);
    }

    if (jumps.has_jumps()) {
        const double lam = jumps.rate();
        const JumpLaw& law = jumps.law();
        // Closed form of the exp(-phi0 y) part of kernel B.
        den += phi0 > 0.0 ? lam * (1.0 - law.laplace(phi0)) / phi0 : lam * law.mean();

        std::vector<double> y_kinks, x_kinks;
        if (std::isfinite(H))
            for (double kk : k.y_set().kinks()) y_kinks.push_back(H - kk);
        if (std::isfinite(L))
            for (double kk : k.x_set().kinks()) x_kinks.push_back(kk);
        auto y_breaks = [&](double m) {
            std::vector<double> v = y_kinks;
            for (double kk : x_kinks) v.push_back(m - L + kk);
            return v;
        };
        std::vector<double> m_breaks;
        if (std::isfinite(L)) m_breaks.push_back(L);
        if (std::isfinite(H)) m_breaks.push_back(H);
        if (std::isfinite(L) && std::isfinite(H)) m_breaks.push_back(L + H);

        auto ratio_w = [&](double z) {
            if (!std::isfinite(L)) return std::exp(k.x_set().phi() * z);
            return k.x_set().w_ratio(z + L, L);
        };

        // Subtracted part of kernel B.
        auto b_inner = [&](double m) {
            const double a = std::isfinite(L) ? std::max(0.0, m - L) : 0.0;
            const double b = std::min(m, H);
            return inner_integral([&](double y) { return k.y_ratio(y) * ratio_w(y - m); }, a, b, y_breaks(m),
                                  inner_tol);
        };
        const QuadResult bsub = law_expectation(jumps, b_inner, m_breaks, opts.tol);
        den -= bsub.value;
        err += bsub.error + lam * inner_tol;

        if (std::isfinite(L)) {
            auto a_inner = [&](double m) {
                const double top = std::min(m, H);
                const double split = std::clamp(m - L, 0.0, top);
                double v = 0.0;
                if (split > 0.0) {
                    // Jump lands below lo: bracket equals 1.
                    if (std::isfinite(H)) {
                        v += inner_integral([&](double y) { return k.y_ratio(y); }, 0.0, split, y_kinks, inner_tol);
                    } else {
                        v += phi0 > 0.0 ? -std::expm1(-phi0 * split) / phi0 : split;
                    }
                }
                v += inner_integral([&](double y) { return k.y_ratio(y) * k.x_set().exit_down(y - m + L, L); },
                                    split, top, y_breaks(m), inner_tol);
                return v;
            };
            const QuadResult ia = law_expectation(jumps, a_inner, m_breaks, opts.tol);
            num += ia.value;
            err += ia.error + 2.0 * lam * inner_tol;
        }
    }

    if (!(den > 0.0)) throw ConsistencyError("occupation transform: non-positive denominator");
    LaplaceResult r;
    r.numerator = num;
    r.denominator = den;
    r.quad_error = err;
    r.value = num / den;
    // Rounding only; larger excursions are left visible.
    if (r.value > 1.0 && r.value - 1.0 <= 1e-9) r.value = 1.0;
    return r;
}

void check_theta(double theta) {
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("theta must be finite and >= 0");
}

}  // namespace

namespace {

ScaleFunctionSet make_set(const LevyModel& m, double q, const ScaleGridParams& grid,
                          std::optional<ScaleBackend> backend) {
    return backend ? ScaleFunctionSet(m, q, *backend, grid) : ScaleFunctionSet::automatic(m, q, grid);
}

}  // namespace

KernelContext::KernelContext(const RefractedModel& rmodel, double theta, double lo, double hi,
                             const ScaleGridParams& grid, std::optional<ScaleBackend> backend)
    : rmodel_(rmodel),
      theta_(theta),
      below_(rmodel.b() - lo),
      above_(hi - rmodel.b()),
      phi0_(small_phi(rmodel, 0.0)),
      x_(make_set(rmodel.x(), theta, grid, backend)),
      y_(make_set(rmodel.y(), 0.0, grid, backend)) {
    check_theta(theta);
    if (!(below_ > 0.0) || !(above_ > 0.0)) throw DomainError("occupation query needs lo < b < hi");
    if (!rmodel.x().is_bv() && (below_ < 1e-6 || above_ < 1e-6)) {
        throw DomainError("unbounded variation: barriers must be at least 1e-6 away from b");
    }
}

double KernelContext::y_ratio(double y) const {
    if (!std::isfinite(above_)) return y > 0.0 ? std::exp(-phi0_ * y) : 0.0;
    if (!(y > 0.0 && y < above_)) return 0.0;
    return y_.w_ratio(above_ - y, above_);
}

double kernel_A(const KernelContext& k, double z, double y) {
    if (!(z < 0.0) || !std::isfinite(k.below())) return 0.0;
    const double yr = k.y_ratio(y);
    if (yr == 0.0) return 0.0;
    return yr * k.x_set().exit_down(z + k.below(), k.below());
}

double kernel_B(const KernelContext& k, double z, double y) {
    const double base = y > 0.0 ? std::exp(-k.phi0() * y) : 0.0;
    if (!(z < 0.0)) return base;
    const double yr = k.y_ratio(y);
    if (yr == 0.0) return base;
    const double L = k.below();
    double ratio;
    if (!std::isfinite(L)) ratio = std::exp(k.x_set().phi() * z);
    else if (z > -L) ratio = k.x_set().w_ratio(z + L, L);
    else ratio = 0.0;
    return base - yr * ratio;
}

double kernel_C(const KernelContext& k) {
    if (!std::isfinite(k.below())) return 0.0;
    return k.x_set().z_wlog_minus_qw(k.below());
}

double kernel_D(const KernelContext& k) {
    const double yd = std::isfinite(k.above()) ? k.y_set().w_log_derivative(k.above()) : k.phi0();
    const double xd = std::isfinite(k.below()) ? k.x_set().w_log_derivative(k.below()) : k.x_set().phi();
    return yd + xd - k.phi0();
}

QuadResult pi_double_integral(const PairKernel& kernel, const JumpSpec& jumps, const PiIntegralOptions& opts) {
    const double inner_tol = opts.tol / 10.0;
    auto inner = [&](double m) {
        const double top = std::min(m, opts.y_cap);
        std::vector<double> br = opts.y_breaks ? opts.y_breaks(m) : std::vector<double>{};
        return inner_integral([&](double y) { return kernel(y - m, y); }, 0.0, top, br, inner_tol);
    };
    std::vector<double> breaks = opts.m_breaks;
    if (std::isfinite(opts.y_cap)) breaks.push_back(opts.y_cap);
    QuadResult r = law_expectation(jumps, inner, breaks, opts.tol);
    r.error += jumps.rate() * inner_tol;
    return r;
}

LaplaceResult theorem1_lt(const RefractedModel& rmodel, double theta, double lo, double hi, const LtOptions& opts) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw DomainError("theorem1_lt needs finite lo and hi");
    return assemble(KernelContext(rmodel, theta, lo, hi, opts.grid, opts.backend), opts);
}

LaplaceResult corollary1_up_lt(const RefractedModel& rmodel, double theta, double hi, const LtOptions& opts) {
    if (!std::isfinite(hi)) throw DomainError("corollary1_up_lt needs finite hi");
    return assemble(KernelContext(rmodel, theta, -kInf, hi, opts.grid, opts.backend), opts);
}

LaplaceResult corollary1_down_lt(const RefractedModel& rmodel, double theta, double lo, const LtOptions& opts) {
    if (!std::isfinite(lo)) throw DomainError("corollary1_down_lt needs finite lo");
    return assemble(KernelContext(rmodel, theta, lo, kInf, opts.grid, opts.backend), opts);
}

double corollary2_lt(const RefractedModel& rmodel, double theta) {
    check_theta(theta);
    const double drift = psi_prime_at_zero(rmodel.x()) - rmodel.delta();
    if (!(drift > 0.0)) throw DomainError("total occupation transform needs psi'(0+) > delta");
    if (theta < 1e-12) return 1.0;
    const double phi = big_phi(rmodel.x(), theta);
    return drift * phi / (theta - rmodel.delta() * phi);
}

LaplaceResult occupation_lt(const RefractedModel& rmodel, const OccupationQuery& query, const LtOptions& opts) {
    const bool lo_fin = std::isfinite(query.lo), hi_fin = std::isfinite(query.hi);
    if (lo_fin && hi_fin) return theorem1_lt(rmodel, query.theta, query.lo, query.hi, opts);
    if (hi_fin) return corollary1_up_lt(rmodel, query.theta, query.hi, opts);
    if (lo_fin) return corollary1_down_lt(rmodel, query.theta, query.lo, opts);
    const double v = corollary2_lt(rmodel, query.theta);
    return {v, v, 1.0, 0.0};
}

double ladder_drift(const LevyModel& model) { return model.is_bv() ? 1.0 / model.c0() : 0.0; }

double parisian_ruin(const RefractedModel& rmodel, double q) {
    if (rmodel.b() != 0.0) throw DomainError("parisian_ruin needs barrier b = 0");
    if (!(q > 0.0)) throw DomainError("parisian_ruin needs a clock rate q > 0");
    return 1.0 - corollary2_lt(rmodel, q);
}

}  // namespace refract
