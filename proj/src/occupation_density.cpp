#include <algorithm>
#include <cmath>

#include "refract/errors.hpp"
#include "refract/laplace_inversion.hpp"
#include "refract/occupation.hpp"

namespace refract {

namespace {

using cplx = std::complex<double>;

bool newton_root(const LevyModel& m, cplx s, cplx& lam) {
    for (int it = 0; it < 40; ++it) {
        const cplx f = m.psi(lam) - s;
        const cplx d = m.psi_d1(lam);
        if (d == cplx(0.0)) return false;
        const cplx step = f / d;
        lam -= step;
        if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) return false;
        if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(lam))) return lam.real() > 0.0;
    }
    return false;
}

// Follows the root of psi(lam) = s from (s0, lam0) to s1.
bool continue_root(const LevyModel& m, cplx s0, cplx lam0, cplx s1, cplx& out, int depth = 0) {
    cplx guess = lam0 + (s1 - s0) / m.psi_d1(lam0);
    if (newton_root(m, s1, guess)) {
        out = guess;
        return true;
    }
    if (depth > 12) return false;
    const cplx mid = 0.5 * (s0 + s1);
    cplx lam_mid;
    if (!continue_root(m, s0, lam0, mid, lam_mid, depth + 1)) return false;
    return continue_root(m, mid, lam_mid, s1, out, depth + 1);
}

// Phi along the Bromwich points of one inversion, reusing the previous root.
class PhiTracker {
public:
    explicit PhiTracker(const LevyModel& m) : m_(m) {}

    cplx operator()(cplx s) {
        if (!started_ || s.real() != s_.real()) {
            lam_ = big_phi(m_, s.real());
            s_ = s.real();
            started_ = true;
        }
        cplx next;
        if (s != s_) {
            if (!continue_root(m_, s_, lam_, s, next)) throw ConvergenceError("complex Phi continuation failed");
            lam_ = next;
            s_ = s;
        }
        return lam_;
    }

private:
    const LevyModel& m_;
    bool started_ = false;
    cplx s_ = 0.0;
    cplx lam_ = 0.0;
};

}  // namespace

cplx big_phi_complex(const LevyModel& model, cplx s) {
    if (!(s.real() > 0.0)) throw DomainError("complex Phi needs Re s > 0");
    PhiTracker t(model);
    t(cplx(s.real(), 0.0));
    return t(s);
}

cplx total_occupation_transform(const RefractedModel& rmodel, cplx s) {
    const double drift = psi_prime_at_zero(rmodel.x()) - rmodel.delta();
    if (!(drift > 0.0)) throw DomainError("total occupation transform needs psi'(0+) > delta");
    const cplx phi = big_phi_complex(rmodel.x(), s);
    return drift * phi / (s - rmodel.delta() * phi);
}

OccupationDensity occupation_density(const RefractedModel& rmodel, const DensityOptions& opts) {
    const LevyModel& x = rmodel.x();
    const double drift = psi_prime_at_zero(x) - rmodel.delta();
    if (!(drift > 0.0)) throw DomainError("occupation density needs psi'(0+) > delta");
    if (opts.n_terms < 1) throw ConfigError("n_terms must be >= 1");
    const double delta = rmodel.delta();
    const double a = ladder_drift(x);

    OccupationDensity out;
    out.ladder_drift = a;
    out.atom0 = drift * a / (1.0 - delta * a);
    out.n_terms = opts.n_terms;
    const double atom0 = out.atom0;

    auto invert = [&](double t, auto&& transform) {
        PhiTracker tracker(x);
        auto fhat = [&](cplx s) { return transform(s, tracker(s)); };
        return invert_laplace(fhat, t, opts.inversion);
    };
    auto full = [&](cplx s, cplx phi) { return drift * phi / (s - delta * phi); };
    auto ac = [&](cplx s, cplx phi) { return full(s, phi) - atom0; };
    auto survival = [&](cplx s, cplx phi) { return (1.0 - full(s, phi)) / s; };
    auto series = [&](cplx s, cplx phi) {
        const cplx r = phi / s;
        cplx rn = 1.0, sum = 0.0;
        double an = 1.0, dn = 1.0;
        for (int n = 1; n <= opts.n_terms; ++n) {
            rn *= r;
            an *= a;
            sum += dn * (rn - an);
            dn *= delta;
        }
        return drift * sum;
    };

    if (!opts.grid.empty()) {
        out.x = opts.grid;
        if (std::any_of(out.x.begin(), out.x.end(), [](double v) { return !(v > 0.0); }))
            throw ConfigError("density grid points must be > 0");
        out.x_max = *std::max_element(out.x.begin(), out.x.end());
        out.tail = invert(out.x_max, survival);
    } else {
        if (opts.points < 2) throw ConfigError("density grid needs at least 2 points");
        double xm = opts.x_max_start;
        double tail = invert(xm, survival);
        while (tail > opts.tail_tol) {
            xm *= 2.0;
            if (xm > 1e7) throw ConvergenceError("occupation density: tail does not decay");
            tail = invert(xm, survival);
        }
        out.x_max = xm;
        out.tail = tail;
        const double umax = std::sqrt(xm);
        out.x.resize(opts.points);
        for (int i = 0; i < opts.points; ++i) {
            const double u = umax * (i + 1) / opts.points;
            out.x[i] = u * u;
        }
    }

    const auto n = static_cast<std::ptrdiff_t>(out.x.size());
    out.density.assign(n, 0.0);
    out.series_density.assign(n, 0.0);
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out.density[i] = invert(out.x[i], ac);
        out.series_density[i] = invert(out.x[i], series);
    }

    // Trapezoid in u = sqrt(x): int f dx = int 2 u f(u^2) du.
    std::vector<double> u(n), g(n);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        u[i] = std::sqrt(out.x[i]);
        g[i] = 2.0 * u[i] * out.density[i];
    }
    double mass = 0.0;
    if (n >= 2) {
        const double extrap = g[0] + (g[0] - g[1]) * u[0] / (u[1] - u[0]);
        mass += 0.5 * (extrap + g[0]) * u[0];
        for (std::ptrdiff_t i = 1; i < n; ++i) mass += 0.5 * (g[i] + g[i - 1]) * (u[i] - u[i - 1]);
    }
    out.mass = out.atom0 + mass;
    return out;
}

}  // namespace refract
