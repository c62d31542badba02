#include "refract/levy_model.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "refract/errors.hpp"

namespace refract {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(what) + " must be finite and strictly positive");
    }
}

// P(Poisson(mu) >= k)
double poisson_upper(double mu, int k) {
    if (k <= 0) return 1.0;
    double term = std::exp(-mu);
    double cdf = term;
    for (int j = 1; j < k; ++j) {
        term *= mu / j;
        cdf += term;
    }
    return std::max(0.0, 1.0 - cdf);
}

}  // namespace

JumpLaw::JumpLaw(MagnitudeLaw law) : law_(std::move(law)) {
    std::visit(
        overloaded{
            [&](const ExponentialLaw& e) {
                require_positive(e.mean, "exponential mean");
                components_.push_back({1.0, 1, 1.0 / e.mean});
            },
            [&](const MixedExponentialLaw& m) {
                if (m.weights.empty() || m.weights.size() != m.means.size()) {
                    throw ConfigError("mixed-exponential needs equally many weights and means");
                }
                double total = 0.0;
                for (std::size_t i = 0; i < m.weights.size(); ++i) {
                    require_positive(m.weights[i], "mixed-exponential weight");
                    require_positive(m.means[i], "mixed-exponential mean");
                    total += m.weights[i];
                    components_.push_back({m.weights[i], 1, 1.0 / m.means[i]});
                }
                if (std::abs(total - 1.0) > 1e-12) {
                    throw ConfigError("mixed-exponential weights must sum to 1");
                }
            },
            [&](const ErlangLaw& e) {
                if (e.shape < 1) throw ConfigError("erlang shape must be >= 1");
                require_positive(e.mean, "erlang mean");
                components_.push_back({1.0, e.shape, e.shape / e.mean});
            },
            [&](const PointMassLaw& p) {
                require_positive(p.size, "point-mass size");
                atom_ = p.size;
            },
        },
        law_);
}

double JumpLaw::mean() const {
    if (atom_) return *atom_;
    double m = 0.0;
    for (const auto& c : components_) m += c.weight * c.shape / c.rate;
    return m;
}

double JumpLaw::partial_mean_below(double level) const {
    if (atom_) return *atom_ < level ? *atom_ : 0.0;
    double m = 0.0;
    for (const auto& c : components_) {
        m += c.weight * (c.shape / c.rate) * poisson_upper(c.rate * level, c.shape + 1);
    }
    return m;
}

double JumpLaw::laplace(double theta) const {
    if (atom_) return std::exp(-theta * *atom_);
    double v = 0.0;
    for (const auto& c : components_) v += c.weight * std::pow(c.rate / (c.rate + theta), c.shape);
    return v;
}

std::complex<double> JumpLaw::laplace(std::complex<double> theta) const {
    if (atom_) return std::exp(-theta * *atom_);
    std::complex<double> v = 0.0;
    for (const auto& c : components_) {
        const std::complex<double> r = c.rate / (c.rate + theta);
        std::complex<double> p = r;
        for (int k = 1; k < c.shape; ++k) p *= r;
        v += c.weight * p;
    }
    return v;
}

std::complex<double> JumpLaw::laplace_d1(std::complex<double> theta) const {
    if (atom_) return -*atom_ * std::exp(-theta * *atom_);
    std::complex<double> v = 0.0;
    for (const auto& c : components_) {
        const std::complex<double> r = c.rate / (c.rate + theta);
        std::complex<double> p = r;
        for (int k = 1; k < c.shape; ++k) p *= r;
        v -= c.weight * static_cast<double>(c.shape) / (c.rate + theta) * p;
    }
    return v;
}

double JumpLaw::laplace_d1(double theta) const {
    if (atom_) return -*atom_ * std::exp(-theta * *atom_);
    double v = 0.0;
    for (const auto& c : components_) {
        v -= c.weight * c.shape / (c.rate + theta) * std::pow(c.rate / (c.rate + theta), c.shape);
    }
    return v;
}

double JumpLaw::laplace_d2(double theta) const {
    if (atom_) return *atom_ * *atom_ * std::exp(-theta * *atom_);
    double v = 0.0;
    for (const auto& c : components_) {
        const double s = c.rate + theta;
        v += c.weight * c.shape * (c.shape + 1) / (s * s) * std::pow(c.rate / s, c.shape);
    }
    return v;
}

double JumpLaw::pdf(double m) const {
    if (atom_ || m <= 0.0) return 0.0;
    double v = 0.0;
    for (const auto& c : components_) {
        v += c.weight * std::exp(c.shape * std::log(c.rate) + (c.shape - 1) * std::log(m) -
                                 c.rate * m - std::lgamma(static_cast<double>(c.shape)));
    }
    return v;
}

double JumpLaw::survival(double m) const {
    if (m <= 0.0) return 1.0;
    if (atom_) return m < *atom_ ? 1.0 : 0.0;
    double v = 0.0;
    for (const auto& c : components_) {
        const double mu = c.rate * m;
        double term = std::exp(-mu);
        double s = term;
        for (int j = 1; j < c.shape; ++j) {
            term *= mu / j;
            s += term;
        }
        v += c.weight * s;
    }
    return v;
}

JumpSpec::JumpSpec(double rate, JumpLaw law) {
    require_positive(rate, "jump rate");
    cp_.emplace(CompoundPoisson{rate, std::move(law)});
}

const JumpLaw& JumpSpec::law() const {
    if (!cp_) throw DomainError("jump law requested for a model without jumps");
    return cp_->law;
}

LevyModel::LevyModel(double gamma, double sigma2, JumpSpec jumps)
    : gamma_(gamma), sigma2_(sigma2), jumps_(std::move(jumps)) {
    if (!std::isfinite(gamma_)) throw ConfigError("gamma must be finite");
    if (!(sigma2_ >= 0.0) || !std::isfinite(sigma2_)) {
        throw ConfigError("sigma2 must be finite and >= 0");
    }
    linear_drift_ = gamma_;
    if (jumps_.has_jumps()) linear_drift_ += jumps_.rate() * jumps_.law().partial_mean_below(1.0);
    if (is_bv() && !(linear_drift_ > 0.0)) {
        throw ConfigError("bounded-variation model needs drift c0 > 0 (got " +
                          std::to_string(linear_drift_) + "); a subordinator is not allowed");
    }
}

LevyModel LevyModel::from_bv_drift(double c0, JumpSpec jumps) {
    double gamma = c0;
    if (jumps.has_jumps()) gamma -= jumps.rate() * jumps.law().partial_mean_below(1.0);
    return {gamma, 0.0, std::move(jumps)};
}

double LevyModel::c0() const {
    if (!is_bv()) throw DomainError("c0 is defined only for bounded-variation models");
    return linear_drift_;
}

double LevyModel::psi(double theta) const {
    double v = linear_drift_ * theta + 0.5 * sigma2_ * theta * theta;
    if (jumps_.has_jumps()) v += jumps_.rate() * (jumps_.law().laplace(theta) - 1.0);
    return v;
}

std::complex<double> LevyModel::psi(std::complex<double> theta) const {
    std::complex<double> v = linear_drift_ * theta + 0.5 * sigma2_ * theta * theta;
    if (jumps_.has_jumps()) v += jumps_.rate() * (jumps_.law().laplace(theta) - 1.0);
    return v;
}

std::complex<double> LevyModel::psi_d1(std::complex<double> theta) const {
    std::complex<double> v = linear_drift_ + sigma2_ * theta;
    if (jumps_.has_jumps()) v += jumps_.rate() * jumps_.law().laplace_d1(theta);
    return v;
}

double LevyModel::psi_d1(double theta) const {
    double v = linear_drift_ + sigma2_ * theta;
    if (jumps_.has_jumps()) v += jumps_.rate() * jumps_.law().laplace_d1(theta);
    return v;
}

double LevyModel::psi_d2(double theta) const {
    double v = sigma2_;
    if (jumps_.has_jumps()) v += jumps_.rate() * jumps_.law().laplace_d2(theta);
    return v;
}

LevyModel LevyModel::with_drift_reduced(double delta) const {
    return {gamma_ - delta, sigma2_, jumps_};
}

RefractedModel::RefractedModel(LevyModel x, double delta, double b)
    : x_(std::move(x)), delta_(delta), b_(b), y_(x_) {
    if (!(delta_ >= 0.0) || !std::isfinite(delta_)) {
        throw ConfigError("refraction rate delta must be finite and >= 0");
    }
    if (!std::isfinite(b_)) throw ConfigError("barrier b must be finite");
    if (x_.is_bv() && !(delta_ < x_.c0())) {
        throw HypothesisError("hypothesis (H) violated: bounded-variation driver needs delta < c0 (delta=" +
                              std::to_string(delta_) + ", c0=" + std::to_string(x_.c0()) + ")");
    }
    y_ = x_.with_drift_reduced(delta_);
}

double psi(const LevyModel& model, double theta) {
    if (!(theta >= 0.0)) throw DomainError("psi is defined for theta >= 0");
    return model.psi(theta);
}

double psi_prime_at_zero(const LevyModel& model) {
    double v = model.linear_drift();
    if (model.jumps().has_jumps()) v -= model.jumps().rate() * model.jumps().law().mean();
    return v;
}

double big_phi(const LevyModel& model, double q) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("big_phi needs finite q >= 0");
    const double slope0 = psi_prime_at_zero(model);
    if (q == 0.0 && slope0 >= 0.0) return 0.0;

    // Left end of the increasing branch of the convex exponent.
    double lo = 0.0;
    if (slope0 < 0.0) {
        double a = 0.0, b = 1.0;
        while (model.psi_d1(b) <= 0.0) {
            a = b;
            b *= 2.0;
            if (b > 1e300) throw ConvergenceError("psi' has no sign change");
        }
        for (int i = 0; i < 200 && b - a > 1e-15 * b; ++i) {
            const double m = 0.5 * (a + b);
            (model.psi_d1(m) > 0.0 ? b : a) = m;
        }
        lo = a;
    }
    double hi = std::max(1.0, 2.0 * lo);
    while (model.psi(hi) <= q) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw ConvergenceError("psi does not exceed q");
    }

    // Newton from the right converges monotonically on a convex increasing branch;
    // fall back to bisection whenever an iterate leaves the bracket.
    const double tol = 1e-13 * std::max(1.0, q);
    double t = hi;
    for (int it = 0; it < 200; ++it) {
        const double f = model.psi(t) - q;
        if (std::abs(f) <= tol) return t;
        if (f > 0.0) hi = t; else lo = t;
        const double d = model.psi_d1(t);
        double next = d > 0.0 ? t - f / d : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return next;
        t = next;
    }
    if (std::abs(model.psi(t) - q) <= 1e-12 * std::max(1.0, q)) return t;
    throw ConvergenceError("big_phi: Newton iteration did not converge");
}

double small_phi(const RefractedModel& model, double q) { return big_phi(model.y(), q); }

}  // namespace refract
