#include "refract/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "refract/errors.hpp"

namespace refract {

using cld = std::complex<long double>;

Polynomial::Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) { trim(); }

void Polynomial::trim() {
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    if (c_.empty()) c_.push_back(0.0);
}

Polynomial Polynomial::shifted_power(double a, int k) {
    Polynomial p = constant(1.0);
    const Polynomial lin({a, 1.0});
    for (int i = 0; i < k; ++i) p = p * lin;
    return p;
}

cld Polynomial::operator()(cld s) const {
    cld v = 0.0L;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * s + static_cast<long double>(*it);
    return v;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return constant(0.0);
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
        for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) r[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) r[i] += b.c_[i];
    return Polynomial(std::move(r));
}

Polynomial operator*(double k, const Polynomial& a) {
    std::vector<double> r = a.c_;
    for (auto& v : r) v *= k;
    return Polynomial(std::move(r));
}

std::vector<PolynomialRoot> polynomial_roots(const Polynomial& p) {
    std::vector<double> c = p.coefficients();
    std::vector<PolynomialRoot> out;
    if (p.degree() < 1) return out;

    int zeros = 0;
    while (zeros < static_cast<int>(c.size()) - 1 && c[zeros] == 0.0) ++zeros;
    if (zeros > 0) {
        out.push_back({0.0, zeros});
        c.erase(c.begin(), c.begin() + zeros);
    }
    const int n = static_cast<int>(c.size()) - 1;
    if (n == 0) return out;
    const Polynomial q(c);
    const Polynomial dq = q.derivative();

    // Aberth-Ehrlich simultaneous iteration.
    const long double radius =
        std::pow(std::abs(static_cast<long double>(c[0]) / static_cast<long double>(c[n])), 1.0L / n);
    std::vector<cld> z(n);
    for (int i = 0; i < n; ++i) {
        const long double ang = 2.0L * std::numbers::pi_v<long double> * i / n + 0.4L;
        z[i] = std::polar(radius > 0 ? radius : 1.0L, ang);
    }
    for (int it = 0; it < 1000; ++it) {
        long double worst = 0.0L;
        for (int i = 0; i < n; ++i) {
            const cld pv = q(z[i]);
            if (pv == cld(0.0L)) continue;
            const cld ratio = pv / dq(z[i]);
            cld sum = 0.0L;
            for (int j = 0; j < n; ++j)
                if (j != i) sum += 1.0L / (z[i] - z[j]);
            const cld corr = ratio / (1.0L - ratio * sum);
            z[i] -= corr;
            worst = std::max(worst, std::abs(corr) / std::max(1.0L, std::abs(z[i])));
        }
        if (worst < 1e-19L) break;
    }
    for (auto& r : z) {
        for (int it = 0; it < 3; ++it) {
            const cld d = dq(r);
            if (d == cld(0.0L)) break;
            const cld step = q(r) / d;
            if (!std::isfinite(std::abs(step))) break;
            r -= step;
        }
    }

    // Merge numerically coincident roots.
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        if (used[i]) continue;
        cld sum = z[i];
        int mult = 1;
        used[i] = true;
        for (int j = i + 1; j < n; ++j) {
            if (!used[j] && std::abs(z[j] - z[i]) <= 1e-7L * std::max(1.0L, std::abs(z[i]))) {
                used[j] = true;
                sum += z[j];
                ++mult;
            }
        }
        cld r = sum / static_cast<long double>(mult);
        if (std::abs(r.imag()) <= 1e-14L * std::max(1.0L, std::abs(r))) r = {r.real(), 0.0L};
        out.push_back({std::complex<double>(static_cast<double>(r.real()), static_cast<double>(r.imag())), mult});
    }
    return out;
}

std::vector<ExpPolyTerm> partial_fraction_inverse(const Polynomial& numerator, const Polynomial& denominator,
                                                  const std::vector<PolynomialRoot>& roots) {
    if (numerator.degree() >= denominator.degree()) {
        throw DomainError("partial_fraction_inverse needs a strictly proper rational function");
    }
    const long double lead = denominator.coefficients().back();
    std::vector<ExpPolyTerm> terms;
    for (std::size_t j = 0; j < roots.size(); ++j) {
        const int m = roots[j].multiplicity;
        const cld r(roots[j].value.real(), roots[j].value.imag());

        // Taylor coefficients of numerator at r.
        std::vector<cld> h(m, 0.0L);
        Polynomial d = numerator;
        long double fact = 1.0L;
        for (int i = 0; i < m; ++i) {
            if (i > 0) fact *= i;
            h[i] = d(r) / fact;
            d = d.derivative();
        }
        auto mul_trunc = [m](const std::vector<cld>& a, const std::vector<cld>& b) {
            std::vector<cld> out(m, 0.0L);
            for (int i = 0; i < m; ++i)
                for (int k = 0; i + k < m; ++k) out[i + k] += a[i] * b[k];
            return out;
        };
        for (std::size_t k = 0; k < roots.size(); ++k) {
            if (k == j) continue;
            const cld dk = r - cld(roots[k].value.real(), roots[k].value.imag());
            std::vector<cld> inv(m);
            cld pw = 1.0L / dk;
            for (int i = 0; i < m; ++i) {
                inv[i] = pw;
                pw *= -1.0L / dk;
            }
            for (int e = 0; e < roots[k].multiplicity; ++e) h = mul_trunc(h, inv);
        }
        long double lfact = 1.0L;
        for (int l = 0; l < m; ++l) {
            if (l > 0) lfact *= l;
            const cld coef = h[m - 1 - l] / (lead * lfact);
            terms.push_back({std::complex<double>(static_cast<double>(coef.real()), static_cast<double>(coef.imag())),
                             roots[j].value, l});
        }
    }
    return terms;
}

}  // namespace refract
