#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "refract/levy_model.hpp"
#include "refract/quadrature.hpp"
#include "refract/scale_functions.hpp"

namespace refract {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Occupation below b up to the first exit from (lo, hi), started at b.
/// lo may be -inf and hi may be +inf.
struct OccupationQuery {
    double theta = 0.0;
    double lo = -kInf;
    double hi = kInf;
};

struct LaplaceResult {
    double value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    double quad_error = 0.0;
};

struct LtOptions {
    /// Absolute tolerance of the outer jump-law integrals; inner integrals use tol/10.
    double tol = 1e-10;
    ScaleGridParams grid{};
    /// Forces a scale-function backend; automatic when empty.
    std::optional<ScaleBackend> backend{};
};

/// Scale functions and constants shared by the kernels of one (theta, lo, b, hi).
/// lo = -inf or hi = +inf are allowed and switch off the corresponding factor.
class KernelContext {
public:
    KernelContext(const RefractedModel& rmodel, double theta, double lo, double hi, const ScaleGridParams& grid = {},
                  std::optional<ScaleBackend> backend = std::nullopt);

    const RefractedModel& model() const noexcept { return rmodel_; }
    double theta() const noexcept { return theta_; }
    /// b - lo
    double below() const noexcept { return below_; }
    /// hi - b
    double above() const noexcept { return above_; }
    /// phi(0) of the refracted exponent.
    double phi0() const noexcept { return phi0_; }
    const ScaleFunctionSet& x_set() const noexcept { return x_; }
    const ScaleFunctionSet& y_set() const noexcept { return y_; }

    /// WW(hi-b-y)/WW(hi-b) on y in (0, hi-b), else 0.
    double y_ratio(double y) const;

private:
    RefractedModel rmodel_;
    double theta_;
    double below_;
    double above_;
    double phi0_;
    ScaleFunctionSet x_;
    ScaleFunctionSet y_;
};

/// Kernel A: y-ratio times Z(x) - Z(b-lo) W(x)/W(b-lo), x = z+b-lo. Below lo-b the
/// bracket is continued by its value 1 (W = 0, Z = 1 there), which accounts for
/// jumps from (b, hi) straight below lo.
double kernel_A(const KernelContext& k, double z, double y);
/// exp(-phi(0) y) - y-ratio * W(z+b-lo)/W(b-lo) 1{lo-b < z < 0}.
double kernel_B(const KernelContext& k, double z, double y);
/// Z(b-lo) W'(b-lo)/W(b-lo) - theta W(b-lo).
double kernel_C(const KernelContext& k);
/// WW'(hi-b)/WW(hi-b) + W'(b-lo)/W(b-lo) - phi(0).
double kernel_D(const KernelContext& k);

using PairKernel = std::function<double(double z, double y)>;

struct PiIntegralOptions {
    double tol = 1e-8;
    /// Kernel vanishes for y >= y_cap.
    double y_cap = kInf;
    /// Extra break points of the outer integral over the jump magnitude.
    std::vector<double> m_breaks{};
    /// Break points of the inner integral given the magnitude.
    std::function<std::vector<double>(double m)> y_breaks{};
};

/// int_0^inf int_{z<0} kernel(z, y) Pi(dz - y) dy
///   = lambda E[ int_0^M kernel(y - M, y) dy ].
QuadResult pi_double_integral(const PairKernel& kernel, const JumpSpec& jumps, const PiIntegralOptions& opts = {});

/// Occupation up to the exit from (lo, hi), lo < b < hi finite.
LaplaceResult theorem1_lt(const RefractedModel& rmodel, double theta, double lo, double hi, const LtOptions& opts = {});
/// Occupation up to the first passage above hi.
LaplaceResult corollary1_up_lt(const RefractedModel& rmodel, double theta, double hi, const LtOptions& opts = {});
/// Occupation up to the first passage below lo.
LaplaceResult corollary1_down_lt(const RefractedModel& rmodel, double theta, double lo, const LtOptions& opts = {});
/// Total occupation below b; requires psi'(0+) > delta.
double corollary2_lt(const RefractedModel& rmodel, double theta);

/// Dispatches on which of lo, hi are infinite.
LaplaceResult occupation_lt(const RefractedModel& rmodel, const OccupationQuery& query, const LtOptions& opts = {});

/// lim Phi(theta)/theta: 1/c0 for bounded variation, 0 otherwise.
double ladder_drift(const LevyModel& model);

struct DensityOptions {
    int points = 400;
    int n_terms = 30;
    /// x_max is doubled until P(total occupation > x_max) is below this.
    double tail_tol = 1e-4;
    double x_max_start = 10.0;
    /// Explicit grid (all > 0); overrides points and x_max search when non-empty.
    std::vector<double> grid{};
    InversionParams inversion{};
};

struct OccupationDensity {
    double ladder_drift = 0.0;
    double atom0 = 0.0;
    std::vector<double> x;
    std::vector<double> density;
    int n_terms = 0;
    /// Density from inverting the truncated convolution series.
    std::vector<double> series_density;
    double x_max = 0.0;
    /// P(total occupation > x_max).
    double tail = 0.0;
    /// atom0 + grid integral of the density.
    double mass = 0.0;
};

/// Law of the total occupation below b: atom at 0 plus a density on (0, inf).
OccupationDensity occupation_density(const RefractedModel& rmodel, const DensityOptions& opts = {});

/// Analytic continuation of Phi to Re s > 0 along the path from Re s.
std::complex<double> big_phi_complex(const LevyModel& model, std::complex<double> s);

/// Transform of the total occupation below b at complex s, Re s > 0.
std::complex<double> total_occupation_transform(const RefractedModel& rmodel, std::complex<double> s);

/// Parisian ruin probability from 0 with barrier b = 0 and clock rate q.
double parisian_ruin(const RefractedModel& rmodel, double q);

}  // namespace refract
