#pragma once

#include <complex>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace refract {

// Magnitude laws on (0, inf). X jumps by -M.
struct ExponentialLaw {
    double mean;
};
struct MixedExponentialLaw {
    std::vector<double> weights;
    std::vector<double> means;
};
struct ErlangLaw {
    int shape;
    double mean;
};
struct PointMassLaw {
    double size;
};

using MagnitudeLaw = std::variant<ExponentialLaw, MixedExponentialLaw, ErlangLaw, PointMassLaw>;

/// One term of a mixture of Erlang laws: density weight * Gamma(shape, rate).
struct ErlangComponent {
    double weight;
    int shape;
    double rate;
};

/// Validated magnitude law. Every supported family has a finite mean and a
/// closed-form Laplace transform; all but the point mass are rational in theta.
class JumpLaw {
public:
    explicit JumpLaw(MagnitudeLaw law);

    const MagnitudeLaw& law() const noexcept { return law_; }

    double mean() const;
    /// E[M; M < level]
    double partial_mean_below(double level) const;
    /// E[exp(-theta M)]
    double laplace(double theta) const;
    std::complex<double> laplace(std::complex<double> theta) const;
    double laplace_d1(double theta) const;
    std::complex<double> laplace_d1(std::complex<double> theta) const;
    double laplace_d2(double theta) const;
    /// Density of M; zero everywhere for the point mass.
    double pdf(double m) const;
    /// P(M > m)
    double survival(double m) const;

    bool is_rational() const noexcept { return !atom_; }
    /// Location of the atom for the point-mass law.
    std::optional<double> atom() const noexcept { return atom_; }
    /// Mixture-of-Erlang form; empty for the point mass.
    std::span<const ErlangComponent> components() const noexcept { return components_; }

private:
    MagnitudeLaw law_;
    std::vector<ErlangComponent> components_;
    std::optional<double> atom_;
};

struct CompoundPoisson {
    double rate;
    JumpLaw law;
};

/// Either no jumps or a compound Poisson stream of downward jumps.
class JumpSpec {
public:
    JumpSpec() = default;
    JumpSpec(double rate, JumpLaw law);

    static JumpSpec none() { return {}; }

    bool has_jumps() const noexcept { return cp_.has_value(); }
    double rate() const noexcept { return cp_ ? cp_->rate : 0.0; }
    /// Requires has_jumps().
    const JumpLaw& law() const;

private:
    std::optional<CompoundPoisson> cp_;
};

/// Spectrally negative Levy process given by its Levy-Khintchine triplet
/// (gamma, sigma^2, Pi) with Pi a finite compound-Poisson measure.
class LevyModel {
public:
    LevyModel(double gamma, double sigma2, JumpSpec jumps);

    /// Bounded-variation model X_t = c0 t - S_t, gamma derived from c0.
    static LevyModel from_bv_drift(double c0, JumpSpec jumps);

    double gamma() const noexcept { return gamma_; }
    double sigma2() const noexcept { return sigma2_; }
    const JumpSpec& jumps() const noexcept { return jumps_; }

    bool is_bv() const noexcept { return sigma2_ == 0.0; }
    /// Drift of the bounded-variation decomposition; throws for unbounded variation.
    double c0() const;
    /// Deterministic drift between jumps, gamma + lambda E[M; M<1].
    double linear_drift() const noexcept { return linear_drift_; }

    double psi(double theta) const;
    std::complex<double> psi(std::complex<double> theta) const;
    double psi_d1(double theta) const;
    std::complex<double> psi_d1(std::complex<double> theta) const;
    double psi_d2(double theta) const;

    /// Same sigma^2 and jumps, drift lowered by delta.
    LevyModel with_drift_reduced(double delta) const;

private:
    double gamma_;
    double sigma2_;
    JumpSpec jumps_;
    double linear_drift_;
};

/// Levy driver X together with refraction rate delta above barrier b.
class RefractedModel {
public:
    /// Throws HypothesisError when X has bounded variation and delta >= c0.
    RefractedModel(LevyModel x, double delta, double b);

    const LevyModel& x() const noexcept { return x_; }
    /// Exponent psi(theta) - delta theta.
    const LevyModel& y() const noexcept { return y_; }
    double delta() const noexcept { return delta_; }
    double b() const noexcept { return b_; }

    RefractedModel with_barrier(double b) const { return {x_, delta_, b}; }

private:
    LevyModel x_;
    double delta_;
    double b_;
    LevyModel y_;
};

double psi(const LevyModel& model, double theta);
/// psi'(0+) = E[X_1].
double psi_prime_at_zero(const LevyModel& model);
/// Largest root of psi(lambda) = q.
double big_phi(const LevyModel& model, double q);
/// Largest root of psi(theta) - delta theta = q.
double small_phi(const RefractedModel& model, double q);

}  // namespace refract
