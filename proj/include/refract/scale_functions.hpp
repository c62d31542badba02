#pragma once

#include <limits>
#include <span>
#include <vector>

#include "refract/laplace_inversion.hpp"
#include "refract/levy_model.hpp"
#include "refract/polynomial.hpp"

namespace refract {

enum class ScaleBackend { rational, numeric };

const char* to_string(ScaleBackend b);

/// Precision and grid controls of the numeric backend.
struct ScaleGridParams {
    InversionParams inversion{};
    /// Largest abscissa the numeric backend serves.
    double extent = 40.0;
    /// Uniform node spacing on [1, extent].
    double step = 0.005;
    /// Geometric nodes on [near_zero, 1].
    int near_zero_nodes = 400;
    double near_zero = 1e-6;
};

/// q-scale functions W^(q), W^(q)' and Z^(q) of one Laplace exponent.
///
/// Both backends share one representation that stays accurate when W grows
/// exponentially:
///
///   W(x) = lead * exp(phi x) + R(x),   Z(x) = zlead * exp(phi x) + Zr(x),
///
/// with phi = Phi(q), lead = 1/psi'(phi) and zlead = q lead / phi. R and Zr stay
/// bounded, so ratios such as W(x)/W(u) and Z(x) - Z(u) W(x)/W(u) are formed
/// without cancelling exponentially large terms. The rational backend holds R
/// as an exact exponential-polynomial sum; the numeric backend tabulates R by
/// contour inversion of 1/(psi(s)-q) - lead/(s-phi).
class ScaleFunctionSet {
public:
    ScaleFunctionSet(const LevyModel& exponent, double q, ScaleBackend backend, ScaleGridParams params = {});

    /// Rational backend when the jump law allows it, numeric otherwise.
    static ScaleFunctionSet automatic(const LevyModel& exponent, double q, ScaleGridParams params = {});

    const LevyModel& exponent() const noexcept { return model_; }
    double q() const noexcept { return q_; }
    ScaleBackend backend() const noexcept { return backend_; }
    const ScaleGridParams& params() const noexcept { return params_; }

    double phi() const noexcept { return phi_; }
    double lead() const noexcept { return lead_; }
    /// W(0+): 1/c0 for bounded variation, 0 otherwise.
    double w_at_zero() const noexcept { return w0_; }
    /// Largest supported abscissa (infinite for the rational backend).
    double max_x() const noexcept;

    /// 0 for x < 0; x = 0 returns W(0+).
    double w(double x) const;
    double w_prime(double x) const;
    double z(double x) const;

    /// W(x)/W(upper), 0 for x < 0.
    double w_ratio(double x, double upper) const;
    /// W'(x)/W(x), x > 0.
    double w_log_derivative(double x) const;
    /// Z(x) - Z(upper) W(x)/W(upper); equals 1 for x < 0.
    double exit_down(double x, double upper) const;
    /// Z(x) W'(x)/W(x) - q W(x), x > 0.
    double z_wlog_minus_qw(double x) const;
    /// 1/W(x), x >= 0.
    double w_reciprocal(double x) const;

    double remainder(double x) const;
    double remainder_prime(double x) const;
    double z_remainder(double x) const;

    /// Tabulation nodes (numeric backend only).
    std::span<const double> grid() const noexcept { return nodes_; }
    /// Abscissae where W' may jump (point-mass jumps, bounded variation).
    std::span<const double> kinks() const noexcept { return kinks_; }

    /// Numeric-backend inversion of R at one point, bypassing the table.
    double invert_remainder(double x) const;
    /// Closed-form part of R carrying the derivative jumps at the kinks
    /// (zero unless the jumps are a point mass).
    double singular_part(double x) const;

    /// Rebuilds the numeric table point by point without threads (test reference).
    std::vector<double> tabulate_serial() const;
    std::vector<double> tabulate_parallel() const;

private:
    void build_rational();
    void build_numeric();
    double interp_remainder(double x) const;
    double cell_integral(std::size_t cell, double upto) const;
    void check_range(double x) const;
    double w_scaled(double x, double upper) const;
    double invert_smooth(double x) const;
    double singular_prime(double x) const;
    double singular_integral(double x) const;

    LevyModel model_;
    double q_;
    ScaleBackend backend_;
    ScaleGridParams params_;
    double phi_ = 0.0;
    double lead_ = 0.0;
    double zlead_ = 0.0;
    double w0_ = 0.0;

    // rational
    std::vector<ExpPolyTerm> terms_;

    // numeric
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> cumulative_;
    std::vector<double> kinks_;
    // singular_part = sum coef (x - at)_+^power exp(damp (x - at))
    struct KinkTerm {
        double coef;
        double at;
        int power;
        double fact;
    };
    std::vector<KinkTerm> kink_terms_;
    double damp_ = -1.0;
};

double w(const ScaleFunctionSet& set, double x);
double w_prime(const ScaleFunctionSet& set, double x);
double z(const ScaleFunctionSet& set, double x);

/// E_x[exp(-q tau+_upper); tau+_upper < tau-_0] = W(x)/W(upper).
double two_sided_exit_up(const ScaleFunctionSet& set, double x, double upper);
/// E_x[exp(-q tau-_0); tau-_0 < tau+_upper] = Z(x) - Z(upper) W(x)/W(upper).
double two_sided_exit_down(const ScaleFunctionSet& set, double x, double upper);

/// Density in z < 0 of P(Y at first passage below 0 in dz, sup of Y before it < cap),
/// Y = X - delta t started at 0. For point-mass jumps the law is still absolutely
/// continuous in z and the value is a proper density. `y_scale` must be the q = 0
/// set of rmodel.y(). Bounded-variation Y only.
double overshoot_kernel(const RefractedModel& rmodel, const ScaleFunctionSet& y_scale, double z, double cap);
double overshoot_kernel(const RefractedModel& rmodel, double z, double cap);

}  // namespace refract
