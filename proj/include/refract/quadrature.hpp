#pragma once

#include <functional>
#include <span>

namespace refract {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    int max_subdivisions = 4000;
};

using Integrand = std::function<double(double)>;

/// Globally adaptive 15-point Gauss-Kronrod quadrature. `b` may be +inf.
/// Throws AccuracyError when the tolerance is not met inside the budget.
QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opts = {});

/// Same, with a shared error budget over consecutive pieces
/// [points[0], points[1]], ..., [points[n-2], points[n-1]]. The last point may be +inf.
QuadResult integrate_pieces(const Integrand& f, std::span<const double> points,
                            const QuadOptions& opts = {});

/// Fixed 15-point Kronrod rule on [a, b] (finite), no adaptation.
double kronrod15(const Integrand& f, double a, double b);

}  // namespace refract
