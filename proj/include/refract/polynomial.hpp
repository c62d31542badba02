#pragma once

#include <complex>
#include <vector>

namespace refract {

/// Dense real polynomial, coefficient i multiplies s^i.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients);

    static Polynomial constant(double c) { return Polynomial({c}); }
    /// (s + a)^k
    static Polynomial shifted_power(double a, int k);

    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    const std::vector<double>& coefficients() const noexcept { return c_; }

    std::complex<long double> operator()(std::complex<long double> s) const;
    Polynomial derivative() const;

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(double k, const Polynomial& a);

private:
    void trim();
    std::vector<double> c_;
};

struct PolynomialRoot {
    std::complex<double> value;
    int multiplicity;
};

/// All complex roots (Aberth-Ehrlich in extended precision, Newton polish),
/// with numerically coincident roots merged into one entry.
std::vector<PolynomialRoot> polynomial_roots(const Polynomial& p);

/// c * x^power * exp(rate * x)
struct ExpPolyTerm {
    std::complex<double> coef;
    std::complex<double> rate;
    int power;
};

/// Inverse Laplace transform of numerator(s)/denominator(s), deg numerator < deg denominator,
/// as a finite sum of exponential-polynomial terms. `roots` are the roots of the denominator.
std::vector<ExpPolyTerm> partial_fraction_inverse(const Polynomial& numerator, const Polynomial& denominator,
                                                  const std::vector<PolynomialRoot>& roots);

}  // namespace refract
