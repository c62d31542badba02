#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace refract {

/// Bromwich-contour trapezoid sum with Euler (binomial) averaging of the
/// alternating tail. shift is the contour abscissa parameter A: the
/// discretization error is about exp(-shift), roundoff grows like exp(shift / 2).
struct InversionParams {
    double shift = 25.0;
    int terms = 40;
    int euler_terms = 20;
};

namespace detail {

inline const std::vector<double>& euler_weights(int m) {
    thread_local std::vector<double> w;
    thread_local int cached = -1;
    if (cached != m) {
        w.assign(m + 1, 0.0);
        double c = std::ldexp(1.0, -m);
        for (int j = 0; j <= m; ++j) {
            w[j] = c;
            c *= static_cast<double>(m - j) / (j + 1);
        }
        cached = m;
    }
    return w;
}

}  // namespace detail

/// f(t) from its transform fhat(s), t > 0. `shift` overrides params.shift when positive.
template <class Transform>
double invert_laplace(Transform&& fhat, double t, const InversionParams& params, double shift = -1.0) {
    const double a = shift > 0.0 ? shift : params.shift;
    const double re = a / (2.0 * t);
    const double im_step = std::numbers::pi / t;
    const int n = params.terms;
    const int m = params.euler_terms;
    const auto& w = detail::euler_weights(m);

    double partial = 0.5 * std::real(fhat(std::complex<double>(re, 0.0)));
    double averaged = 0.0;
    for (int k = 1; k <= n + m; ++k) {
        const double term = std::real(fhat(std::complex<double>(re, k * im_step)));
        partial += (k % 2 == 0) ? term : -term;
        if (k >= n) averaged += w[k - n] * partial;
    }
    if (m == 0) averaged = partial;
    return std::exp(0.5 * a) / t * averaged;
}

}  // namespace refract
