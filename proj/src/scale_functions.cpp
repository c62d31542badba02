#include "refract/scale_functions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "refract/errors.hpp"
#include "refract/quadrature.hpp"

namespace refract {

namespace {

using cplx = std::complex<double>;

// \int_0^x y^p e^{r y} dy
cplx exp_poly_integral(cplx r, int p, double x) {
    if (std::abs(r) * x < 1e-2) {
        // Power series in r x.
        cplx sum = 0.0, rk = 1.0;
        double fact = 1.0;
        for (int k = 0; k < 40; ++k) {
            if (k > 0) {
                rk *= r;
                fact *= k;
            }
            const cplx t = rk * std::pow(x, p + k + 1) / (fact * (p + k + 1));
            sum += t;
            if (std::abs(t) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    const cplx e = std::exp(r * x);
    cplx acc = (e - 1.0) / r;
    for (int j = 1; j <= p; ++j) acc = (std::pow(x, j) * e - static_cast<double>(j) * acc) / r;
    return acc;
}

constexpr int kMaxKinkPower = 12;

constexpr double kGl3x[3] = {-0.7745966692414833770358531, 0.0, 0.7745966692414833770358531};
constexpr double kGl3w[3] = {0.5555555555555555555555556, 0.8888888888888888888888889, 0.5555555555555555555555556};

}  // namespace

const char* to_string(ScaleBackend b) { return b == ScaleBackend::rational ? "rational" : "numeric"; }

ScaleFunctionSet::ScaleFunctionSet(const LevyModel& exponent, double q, ScaleBackend backend,
                                   ScaleGridParams params)
    : model_(exponent), q_(q), backend_(backend), params_(params) {
    if (!(q_ >= 0.0) || !std::isfinite(q_)) throw DomainError("scale functions need finite q >= 0");
    phi_ = big_phi(model_, q_);
    const double slope = model_.psi_d1(phi_);
    lead_ = slope > 0.0 ? 1.0 / slope : 0.0;
    zlead_ = (q_ > 0.0 && lead_ > 0.0) ? q_ * lead_ / phi_ : 0.0;
    w0_ = model_.is_bv() ? 1.0 / model_.c0() : 0.0;
    if (backend_ == ScaleBackend::rational) build_rational();
    else build_numeric();
}

ScaleFunctionSet ScaleFunctionSet::automatic(const LevyModel& exponent, double q, ScaleGridParams params) {
    const bool rational = !exponent.jumps().has_jumps() || exponent.jumps().law().is_rational();
    return {exponent, q, rational ? ScaleBackend::rational : ScaleBackend::numeric, params};
}

double ScaleFunctionSet::max_x() const noexcept {
    return backend_ == ScaleBackend::rational ? std::numeric_limits<double>::infinity() : params_.extent;
}

void ScaleFunctionSet::build_rational() {
    const double lam = model_.jumps().rate();
    Polynomial denom_q = Polynomial::constant(1.0);
    Polynomial laplace_num = Polynomial::constant(0.0);
    if (model_.jumps().has_jumps()) {
        const JumpLaw& law = model_.jumps().law();
        if (!law.is_rational()) throw UnsupportedError("rational backend needs a rational jump transform");
        std::map<double, int> shape_by_rate;
        for (const auto& c : law.components()) {
            auto& k = shape_by_rate[c.rate];
            k = std::max(k, c.shape);
        }
        for (const auto& [rate, k] : shape_by_rate) denom_q = denom_q * Polynomial::shifted_power(rate, k);
        for (const auto& c : law.components()) {
            Polynomial term = Polynomial::constant(c.weight * std::pow(c.rate, c.shape));
            for (const auto& [rate, k] : shape_by_rate) {
                const int e = rate == c.rate ? k - c.shape : k;
                term = term * Polynomial::shifted_power(rate, e);
            }
            laplace_num = laplace_num + term;
        }
    }
    // (psi(s) - q) Q(s) as a polynomial.
    const Polynomial base({-lam - q_, model_.linear_drift(), 0.5 * model_.sigma2()});
    const Polynomial denom = base * denom_q + lam * laplace_num;
    const auto roots = polynomial_roots(denom);
    terms_ = partial_fraction_inverse(denom_q, denom, roots);

    if (lead_ > 0.0) {
        auto best = terms_.end();
        double best_dist = std::numeric_limits<double>::infinity();
        for (auto it = terms_.begin(); it != terms_.end(); ++it) {
            const double d = std::abs(it->rate - cplx(phi_, 0.0));
            if (it->power == 0 && d < best_dist) {
                best_dist = d;
                best = it;
            }
        }
        const bool simple = std::none_of(terms_.begin(), terms_.end(), [&](const ExpPolyTerm& t) {
            return t.power > 0 && std::abs(t.rate - cplx(phi_, 0.0)) <= 1e-6 * (1.0 + phi_);
        });
        if (best == terms_.end() || best_dist > 1e-6 * (1.0 + phi_) || !simple) {
            // Nearly repeated dominant root: keep everything in the remainder.
            lead_ = 0.0;
            zlead_ = 0.0;
        } else {
            if (std::abs(best->coef.real() - lead_) > 1e-6 * lead_) {
                throw ConsistencyError("rational scale function: dominant residue disagrees with 1/psi'(Phi)");
            }
            terms_.erase(best);
        }
    }
}

void ScaleFunctionSet::build_numeric() {
    if (!(params_.extent > 1.0) || !(params_.step > 0.0) || params_.near_zero_nodes < 2 ||
        !(params_.near_zero > 0.0 && params_.near_zero < 1.0)) {
        throw ConfigError("invalid numeric scale-function grid parameters");
    }
    nodes_.clear();
    nodes_.push_back(0.0);
    const double ratio = std::pow(1.0 / params_.near_zero, 1.0 / (params_.near_zero_nodes - 1));
    double x = params_.near_zero;
    for (int i = 0; i < params_.near_zero_nodes - 1; ++i, x *= ratio) nodes_.push_back(x);
    nodes_.push_back(1.0);
    const int uniform = static_cast<int>(std::ceil((params_.extent - 1.0) / params_.step - 1e-9));
    const double h = (params_.extent - 1.0) / uniform;
    for (int i = 1; i <= uniform; ++i) nodes_.push_back(1.0 + i * h);
    nodes_.back() = params_.extent;

    if (model_.is_bv() && model_.jumps().has_jumps() && model_.jumps().law().atom()) {
        const double s = *model_.jumps().law().atom();
        for (double k = s; k <= params_.extent; k += s) kinks_.push_back(k);
        // W = sum_k (-lam)^k (x-ks)_+^k e^{r(x-ks)} / (k! c^{k+1}), r = (lam+q)/c. The k-th term
        // has a jump in its k-th derivative at ks; subtracting its damped Taylor expansion there
        // leaves the inverted remainder smooth to order k + kTaylor.
        constexpr int kOrders = 6, kTaylor = kMaxKinkPower - kOrders;
        const double c = model_.c0(), lam = model_.jumps().rate();
        const double r = (lam + q_) / c;
        double kfact = 1.0;
        for (int k = 1; k <= kOrders && k * s <= params_.extent; ++k) {
            kfact *= k;
            const double base = std::pow(-lam, k) / (kfact * std::pow(c, k + 1));
            double jfact = 1.0;
            for (int j = 0; j <= kTaylor; ++j) {
                if (j > 0) jfact *= j;
                kink_terms_.push_back({base * std::pow(r - damp_, j) / jfact, k * s, k + j,
                                       std::tgamma(k + j + 1.0)});
            }
        }
    }

    values_ = tabulate_parallel();
    cumulative_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
        cumulative_[i + 1] = cumulative_[i] + cell_integral(i, nodes_[i + 1]);
    }
}

double ScaleFunctionSet::invert_smooth(double x) const {
    if (x <= 0.0) return w0_ - lead_;
    const double lead = lead_, phi = phi_, q = q_, damp = damp_;
    const LevyModel& m = model_;
    const auto& kt = kink_terms_;
    const double kink_step = kinks_.empty() ? 0.0 : kinks_.front();
    auto rhat = [&](cplx s) {
        cplx v = 1.0 / (m.psi(s) - q);
        if (lead > 0.0) v -= lead / (s - phi);
        if (!kt.empty()) {
            // (x-a)_+^n e^{damp (x-a)}  <->  n! e^{-a s} / (s-damp)^{n+1}
            const cplx inv = 1.0 / (s - damp);
            std::array<cplx, kMaxKinkPower + 2> ip;
            ip[0] = 1.0;
            for (std::size_t i = 1; i < ip.size(); ++i) ip[i] = ip[i - 1] * inv;
            const cplx step = std::exp(-kink_step * s);
            cplx shifted = 1.0;
            double at = 0.0;
            for (const auto& t : kt) {
                if (t.at != at) {
                    shifted *= step;
                    at = t.at;
                }
                v -= t.coef * t.fact * shifted * ip[t.power + 1];
            }
        }
        return v;
    };
    // Keep the real contour point away from the removed pole at phi.
    double shift = params_.inversion.shift;
    if (lead > 0.0 && std::abs(0.5 * shift - phi * x) < 1.0) shift = 2.0 * phi * x + 2.0;
    return invert_laplace(rhat, x, params_.inversion, shift);
}

double ScaleFunctionSet::invert_remainder(double x) const { return invert_smooth(x) + singular_part(x); }

double ScaleFunctionSet::singular_part(double x) const {
    double v = 0.0;
    for (const auto& t : kink_terms_) {
        const double u = x - t.at;
        if (u > 0.0) v += t.coef * std::pow(u, t.power) * std::exp(damp_ * u);
    }
    return v;
}

// Right derivative.
double ScaleFunctionSet::singular_prime(double x) const {
    double v = 0.0;
    for (const auto& t : kink_terms_) {
        const double u = x - t.at;
        if (u < 0.0) continue;
        const double e = std::exp(damp_ * u);
        double d = damp_ * std::pow(u, t.power);
        if (t.power == 1) d += 1.0;
        else if (u > 0.0) d += t.power * std::pow(u, t.power - 1);
        v += t.coef * d * e;
    }
    return v;
}

double ScaleFunctionSet::singular_integral(double x) const {
    double v = 0.0;
    for (const auto& t : kink_terms_) {
        const double u = x - t.at;
        if (u > 0.0) v += t.coef * exp_poly_integral(damp_, t.power, u).real();
    }
    return v;
}

std::vector<double> ScaleFunctionSet::tabulate_serial() const {
    std::vector<double> v(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) v[i] = invert_smooth(nodes_[i]);
    return v;
}

std::vector<double> ScaleFunctionSet::tabulate_parallel() const {
    std::vector<double> v(nodes_.size());
    const auto n = static_cast<std::ptrdiff_t>(nodes_.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) v[i] = invert_smooth(nodes_[i]);
    return v;
}

double ScaleFunctionSet::interp_remainder(double x) const {
    const std::size_t n = nodes_.size();
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t cell = it == nodes_.begin() ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
    cell = std::min(cell, n - 2);
    const std::size_t j0 = std::min(cell > 0 ? cell - 1 : 0, n - 4);
    double sum = 0.0;
    for (std::size_t a = j0; a < j0 + 4; ++a) {
        double basis = 1.0;
        for (std::size_t b = j0; b < j0 + 4; ++b)
            if (b != a) basis *= (x - nodes_[b]) / (nodes_[a] - nodes_[b]);
        sum += basis * values_[a];
    }
    return sum;
}

double ScaleFunctionSet::cell_integral(std::size_t cell, double upto) const {
    const double a = nodes_[cell];
    const double half = 0.5 * (upto - a), mid = 0.5 * (upto + a);
    if (half == 0.0) return 0.0;
    double s = 0.0;
    for (int k = 0; k < 3; ++k) s += kGl3w[k] * interp_remainder(mid + half * kGl3x[k]);
    return s * half;
}

void ScaleFunctionSet::check_range(double x) const {
    if (backend_ == ScaleBackend::numeric && x > params_.extent * (1.0 + 1e-12)) {
        throw RangeError("numeric scale function evaluated at x=" + std::to_string(x) +
                         " beyond its extent " + std::to_string(params_.extent));
    }
}

double ScaleFunctionSet::remainder(double x) const {
    check_range(x);
    if (x <= 0.0) return w0_ - lead_;
    if (backend_ == ScaleBackend::numeric) return interp_remainder(x) + singular_part(x);
    double s = 0.0;
    for (const auto& t : terms_) {
        const cplx v = t.coef * std::exp(t.rate * x);
        s += (t.power == 0 ? v : v * std::pow(x, t.power)).real();
    }
    return s;
}

double ScaleFunctionSet::remainder_prime(double x) const {
    check_range(x);
    if (!(x > 0.0)) throw DomainError("W' is evaluated for x > 0 only");
    if (backend_ == ScaleBackend::rational) {
        double s = 0.0;
        for (const auto& t : terms_) {
            const cplx e = t.coef * std::exp(t.rate * x);
            cplx d = t.rate * std::pow(x, t.power);
            if (t.power > 0) d += static_cast<double>(t.power) * std::pow(x, t.power - 1);
            s += (e * d).real();
        }
        return s;
    }
    // Finite differences on direct inversions of the smooth part.
    const double h = std::min(2.0 * params_.step, x / 8.0);
    auto f = [&](double at) { return invert_smooth(at); };
    return (f(x - 2 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2 * h)) / (12.0 * h) + singular_prime(x);
}

double ScaleFunctionSet::z_remainder(double x) const {
    check_range(x);
    const double base = 1.0 - zlead_;
    if (x <= 0.0) return base;
    if (q_ == 0.0) return 1.0;
    if (backend_ == ScaleBackend::rational) {
        double s = 0.0;
        for (const auto& t : terms_) s += (t.coef * exp_poly_integral(t.rate, t.power, x)).real();
        return base + q_ * s;
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    std::size_t cell = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    cell = std::min(cell, nodes_.size() - 2);
    return base + q_ * (cumulative_[cell] + cell_integral(cell, x) + singular_integral(x));
}

double ScaleFunctionSet::w(double x) const {
    if (x < 0.0) return 0.0;
    return lead_ * std::exp(phi_ * x) + remainder(x);
}

double ScaleFunctionSet::w_prime(double x) const {
    if (!(x > 0.0)) throw DomainError("W' is evaluated for x > 0 only");
    return lead_ * phi_ * std::exp(phi_ * x) + remainder_prime(x);
}

double ScaleFunctionSet::z(double x) const {
    if (x <= 0.0) return 1.0;
    return zlead_ * std::exp(phi_ * x) + z_remainder(x);
}

double ScaleFunctionSet::w_scaled(double x, double upper) const {
    if (x < 0.0) return 0.0;
    return lead_ * std::exp(phi_ * (x - upper)) + remainder(x) * std::exp(-phi_ * upper);
}

double ScaleFunctionSet::w_ratio(double x, double upper) const {
    if (x < 0.0) return 0.0;
    const double den = w_scaled(upper, upper);
    if (!(den > 0.0)) throw DomainError("W(upper) vanishes; ratio undefined");
    return w_scaled(x, upper) / den;
}

double ScaleFunctionSet::w_log_derivative(double x) const {
    if (!(x > 0.0)) throw DomainError("W'/W is evaluated for x > 0 only");
    const double e = std::exp(-phi_ * x);
    return (lead_ * phi_ + remainder_prime(x) * e) / (lead_ + remainder(x) * e);
}

double ScaleFunctionSet::exit_down(double x, double upper) const {
    if (x < 0.0) return 1.0;
    const double e = std::exp(-phi_ * upper);
    const double ex = std::exp(phi_ * (x - upper));
    const double ru = remainder(upper), rx = remainder(x);
    const double zx = z_remainder(x), zu = z_remainder(upper);
    const double num = zlead_ * ex * ru + zx * lead_ + zx * ru * e - zlead_ * rx - zu * lead_ * ex - zu * rx * e;
    const double den = lead_ + ru * e;
    if (!(den > 0.0)) throw DomainError("W(upper) vanishes; exit probability undefined");
    return num / den;
}

double ScaleFunctionSet::z_wlog_minus_qw(double x) const {
    if (!(x > 0.0)) throw DomainError("Z W'/W - q W is evaluated for x > 0 only");
    const double e = std::exp(-phi_ * x);
    const double r = remainder(x), rp = remainder_prime(x), zr = z_remainder(x);
    const double first = zlead_ * rp + zr * lead_ * phi_ - 2.0 * q_ * lead_ * r;
    const double second = zr * rp - q_ * r * r;
    return (first + e * second) / (lead_ + r * e);
}

double ScaleFunctionSet::w_reciprocal(double x) const {
    if (x < 0.0) throw DomainError("1/W is evaluated for x >= 0 only");
    const double e = std::exp(-phi_ * x);
    const double den = lead_ + remainder(x) * e;
    if (!(den > 0.0)) throw DomainError("W vanishes; reciprocal undefined");
    return e / den;
}

double w(const ScaleFunctionSet& set, double x) { return set.w(x); }
double w_prime(const ScaleFunctionSet& set, double x) { return set.w_prime(x); }
double z(const ScaleFunctionSet& set, double x) { return set.z(x); }

double two_sided_exit_up(const ScaleFunctionSet& set, double x, double upper) {
    if (!(x >= 0.0 && x <= upper)) throw DomainError("two_sided_exit_up needs 0 <= x <= upper");
    if (x == upper) return 1.0;
    return set.w_ratio(x, upper);
}

double two_sided_exit_down(const ScaleFunctionSet& set, double x, double upper) {
    if (!(x >= 0.0 && x <= upper)) throw DomainError("two_sided_exit_down needs 0 <= x <= upper");
    if (x == upper) return 0.0;
    return set.exit_down(x, upper);
}

double overshoot_kernel(const RefractedModel& rmodel, const ScaleFunctionSet& y_scale, double z, double cap) {
    const LevyModel& y = rmodel.y();
    if (!y.is_bv()) throw UnsupportedError("overshoot kernel needs a bounded-variation Y (W(0+) > 0)");
    if (y_scale.q() != 0.0) throw DomainError("overshoot kernel needs the q = 0 scale function of Y");
    if (!(z < 0.0)) throw DomainError("overshoot kernel is a density on z < 0");
    if (!(cap > 0.0)) throw DomainError("overshoot kernel needs cap > 0");
    if (!y.jumps().has_jumps()) return 0.0;
    const double lam = y.jumps().rate();
    const JumpLaw& law = y.jumps().law();
    const double w0 = y_scale.w_at_zero();
    if (auto s = law.atom()) {
        // Pre-jump level y = z + s must lie in (0, cap).
        const double pre = z + *s;
        if (!(pre > 0.0 && pre < cap)) return 0.0;
        return lam * w0 * y_scale.w_ratio(cap - pre, cap);
    }
    auto integrand = [&](double pre) { return y_scale.w_ratio(cap - pre, cap) * law.pdf(pre - z); };
    std::vector<double> pts{0.0};
    for (double k : y_scale.kinks())
        if (cap - k > 0.0 && cap - k < cap) pts.push_back(cap - k);
    pts.push_back(cap);
    std::sort(pts.begin(), pts.end());
    QuadOptions opts;
    opts.abs_tol = 1e-13;
    opts.rel_tol = 1e-12;
    return lam * w0 * integrate_pieces(integrand, pts, opts).value;
}

double overshoot_kernel(const RefractedModel& rmodel, double z, double cap) {
    const auto set = ScaleFunctionSet::automatic(rmodel.y(), 0.0);
    return overshoot_kernel(rmodel, set, z, cap);
}

}  // namespace refract
