#pragma once

// Closed-form oracles written without the library, for cross-checks.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace oracle {

/// Scale functions of psi(t) = mu t + s2 t^2 / 2 (s2 > 0) at level q.
struct Brownian {
    double mu, s2, q;
    double rp() const { return (-mu + std::sqrt(mu * mu + 2.0 * q * s2)) / s2; }
    double rm() const { return (-mu - std::sqrt(mu * mu + 2.0 * q * s2)) / s2; }
    double coef() const { return 2.0 / (s2 * (rp() - rm())); }
    double w(double x) const { return x < 0 ? 0.0 : coef() * (std::exp(rp() * x) - std::exp(rm() * x)); }
    double wp(double x) const { return coef() * (rp() * std::exp(rp() * x) - rm() * std::exp(rm() * x)); }
    double z(double x) const {
        if (x <= 0) return 1.0;
        if (q == 0.0) return 1.0;
        return 1.0 + q * coef() * ((std::exp(rp() * x) - 1.0) / rp() - (std::exp(rm() * x) - 1.0) / rm());
    }
};

/// psi(t) = c t - lam t / (1 + t): drift c, unit-mean exponential jumps at rate lam.
/// 1/(psi - q) = (1 + t) / (c t^2 + (c - lam - q) t - q).
struct ExpJumps {
    double c, lam, q;
    std::array<double, 2> roots() const {
        const double B = c - lam - q;
        const double d = std::sqrt(B * B + 4.0 * c * q);
        return {(-B + d) / (2.0 * c), (-B - d) / (2.0 * c)};
    }
    double coef(int i) const {
        const auto r = roots();
        return (1.0 + r[i]) / (c * (r[i] - r[1 - i]));
    }
    double w(double x) const {
        if (x < 0) return 0.0;
        const auto r = roots();
        return coef(0) * std::exp(r[0] * x) + coef(1) * std::exp(r[1] * x);
    }
    double wp(double x) const {
        const auto r = roots();
        return coef(0) * r[0] * std::exp(r[0] * x) + coef(1) * r[1] * std::exp(r[1] * x);
    }
    double z(double x) const {
        if (x <= 0 || q == 0.0) return 1.0;
        const auto r = roots();
        double s = 0.0;
        for (int i = 0; i < 2; ++i) s += coef(i) * (r[i] == 0.0 ? x : std::expm1(r[i] * x) / r[i]);
        return 1.0 + q * s;
    }
};

/// Drift c, jumps of fixed size s at rate lam, level q. Sums the finite series
/// W(x) = sum_k (-lam)^k (x-ks)^k e^{r(x-ks)} / (k! c^{k+1}), r = (lam+q)/c.
/// Cancels badly for large x; use for x up to a few jump sizes.
struct PointMass {
    double c, lam, s, q;
    double w(double x) const {
        if (x < 0) return 0.0;
        const double r = (lam + q) / c;
        double v = 0.0, fact = 1.0;
        for (int k = 0; k * s < x || k == 0; ++k) {
            if (k > 0) fact *= k;
            const double u = x - k * s;
            v += std::pow(-lam, k) * std::pow(u, k) * std::exp(r * u) / (fact * std::pow(c, k + 1));
        }
        return v;
    }
    /// Right derivative.
    double wp(double x) const {
        const double r = (lam + q) / c;
        double v = 0.0, fact = 1.0;
        for (int k = 0; k * s <= x; ++k) {
            if (k > 0) fact *= k;
            const double u = x - k * s;
            const double poly = r * std::pow(u, k) + (k == 1 ? 1.0 : (k > 1 ? k * std::pow(u, k - 1) : 0.0));
            v += std::pow(-lam, k) * poly * std::exp(r * u) / (fact * std::pow(c, k + 1));
        }
        return v;
    }
};

/// Composite trapezoid on [a, b] with n intervals.
inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

/// Composite trapezoid over [ax, bx] x [ay, by].
inline double trapezoid2d(const std::function<double(double, double)>& f, double ax, double bx, double ay,
                          double by, int nx, int ny) {
    const double hx = (bx - ax) / nx, hy = (by - ay) / ny;
    double s = 0.0;
    for (int i = 0; i <= nx; ++i) {
        const double wx = (i == 0 || i == nx) ? 0.5 : 1.0;
        const double x = ax + i * hx;
        for (int j = 0; j <= ny; ++j) {
            const double wy = (j == 0 || j == ny) ? 0.5 : 1.0;
            s += wx * wy * f(x, ay + j * hy);
        }
    }
    return s * hx * hy;
}

/// Textbook Philox4x32-10, one round at a time.
inline std::array<std::uint32_t, 4> philox_reference(std::array<std::uint32_t, 4> x, std::array<std::uint32_t, 2> k) {
    for (int r = 0; r < 10; ++r) {
        const std::uint64_t a = 0xD2511F53ull * x[0];
        const std::uint64_t b = 0xCD9E8D57ull * x[2];
        x = {std::uint32_t(b >> 32) ^ x[1] ^ k[0], std::uint32_t(b), std::uint32_t(a >> 32) ^ x[3] ^ k[1],
             std::uint32_t(a)};
        k[0] += 0x9E3779B9u;
        k[1] += 0xBB67AE85u;
    }
    return x;
}

/// Two-sided KS statistic of two sorted samples.
template <class V>
double ks_statistic(const V& a, const V& b) {
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace oracle
