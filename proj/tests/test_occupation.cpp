#include <catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "refract/errors.hpp"
#include "refract/occupation.hpp"

using namespace refract;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace

TEST_CASE("kernel A") {
    const auto bm = fx::refracted(fx::bm1(), 0.5);
    const KernelContext k(bm, 2.0, -1.0, 1.0);
    CHECK(kernel_A(k, -0.5, 1.2) == 0.0);
    CHECK(kernel_A(k, 0.1, 0.3) == 0.0);

    // Hand composition from the closed forms: X at q=2, Y = 0.5 t + t^2 at q=0.
    const oracle::Brownian xw{1.0, 2.0, 2.0}, yw{0.5, 2.0, 0.0};
    const double yr = yw.w(1.0 - 0.3) / yw.w(1.0);
    const double bracket = xw.z(0.5) - xw.z(1.0) * xw.w(0.5) / xw.w(1.0);
    CHECK_THAT(kernel_A(k, -0.5, 0.3), WithinRel(yr * bracket, 1e-10));

    // Below lo the bracket is 1.
    CHECK_THAT(kernel_A(k, -1.5, 0.3), WithinRel(yr, 1e-12));

    // theta = 0: Z = 1.
    const KernelContext k0(bm, 0.0, -1.0, 1.0);
    const oracle::Brownian x0{1.0, 2.0, 0.0};
    CHECK_THAT(kernel_A(k0, -0.5, 0.3), WithinRel(yr * (1.0 - x0.w(0.5) / x0.w(1.0)), 1e-10));
}

TEST_CASE("kernel B") {
    const auto cl = fx::refracted(fx::cl1(), 1.5);
    const KernelContext k(cl, 1.0, -1.0, 1.0);
    CHECK_THAT(k.phi0(), WithinRel(1.0, 1e-12));
    CHECK_THAT(kernel_B(k, -0.3, 2.0), WithinRel(std::exp(-2.0), 1e-11));
    CHECK_THAT(kernel_B(k, -0.3, 1.0), WithinRel(std::exp(-1.0), 1e-11));
    // Subtracted term vanishes outside (lo-b, 0).
    CHECK_THAT(kernel_B(k, -1.3, 0.5), WithinRel(std::exp(-0.5), 1e-11));

    // phi0 = 0, z -> 0-, y -> 0+, both barriers removed: terms cancel.
    const auto up = fx::refracted(fx::cl1(), 0.5);
    const KernelContext kinf(up, 1.0, -kInf, kInf);
    CHECK(std::abs(kernel_B(kinf, -1e-9, 1e-9)) < 1e-8);
}

TEST_CASE("kernel C") {
    const auto bm = fx::refracted(fx::bm1(), 0.5);
    const KernelContext k(bm, 2.0, -1.0, 1.0);
    const oracle::Brownian xw{1.0, 2.0, 2.0};
    const double hand = xw.z(1.0) * xw.wp(1.0) / xw.w(1.0) - 2.0 * xw.w(1.0);
    CHECK_THAT(hand, WithinRel(0.42727880898490955, 1e-12));
    CHECK_THAT(kernel_C(k), WithinRel(hand, 1e-10));

    const KernelContext k0(bm, 0.0, -1.0, 1.0);
    const oracle::Brownian x0{1.0, 2.0, 0.0};
    CHECK_THAT(kernel_C(k0), WithinRel(x0.wp(1.0) / x0.w(1.0), 1e-10));

    const KernelContext far(bm, 2.0, -30.0, 1.0);
    CHECK(std::abs(kernel_C(far)) < 1e-3);
}

TEST_CASE("kernel D limits") {
    const auto bm = fx::refracted(fx::bm1(), 0.0);
    const KernelContext k(bm, 0.0, -kInf, kInf);
    CHECK(kernel_D(k) == 0.0);

    const auto bmr = fx::refracted(fx::bm1(), 0.5);
    const KernelContext up(bmr, 1.0, -kInf, 1.0);
    const oracle::Brownian yw{0.5, 2.0, 0.0};
    CHECK_THAT(kernel_D(up), WithinRel(yw.wp(1.0) / yw.w(1.0) + big_phi(fx::bm1(), 1.0) - 0.0, 1e-10));

    const KernelContext down(bmr, 1.0, -1.0, kInf);
    const oracle::Brownian xw{1.0, 2.0, 1.0};
    CHECK_THAT(kernel_D(down), WithinRel(xw.wp(1.0) / xw.w(1.0), 1e-10));

    const KernelContext hi30(bmr, 1.0, -1.0, 30.0);
    CHECK_THAT(kernel_D(hi30), WithinRel(kernel_D(down), 1e-4));
}

TEST_CASE("Pi double integral") {
    const auto cl = fx::refracted(fx::cl1(), 0.5);
    const PairKernel one = [](double, double) { return 1.0; };
    CHECK(pi_double_integral(one, fx::bm1().jumps()).value == 0.0);
    CHECK_THAT(pi_double_integral(one, cl.x().jumps()).value, WithinRel(1.0, 1e-9));
    const auto pm = fx::point_mass();
    CHECK_THAT(pi_double_integral(one, pm.jumps()).value, WithinRel(1.0, 1e-12));
}

TEST_CASE("Pi double integral of kernel A against a 2000x2000 trapezoid") {
    const auto cl = fx::refracted(fx::cl1(), 0.5);
    const double theta = 0.5, lo = -1.0, hi = 1.0;
    const KernelContext k(cl, theta, lo, hi);
    PiIntegralOptions opts;
    opts.y_cap = hi;
    opts.m_breaks = {1.0, 2.0};
    opts.y_breaks = [](double m) { return std::vector<double>{m - 1.0}; };
    const double lib = pi_double_integral([&](double z, double y) { return kernel_A(k, z, y); }, cl.x().jumps(), opts).value;

    const oracle::ExpJumps xw{2.0, 1.0, theta}, yw{1.5, 1.0, 0.0};
    auto yr = [&](double y) { return yw.w(1.0 - y) / yw.w(1.0); };
    auto ed = [&](double x) { return xw.z(x) - xw.z(1.0) * xw.w(x) / xw.w(1.0); };
    // Pi(dz - y) has density exp(z - y) on z - y < 0.
    const double square =
        oracle::trapezoid2d([&](double z, double y) { return std::exp(z - y) * yr(y) * ed(z + 1.0); }, -1.0, 0.0,
                            0.0, 1.0, 2000, 2000);
    // z < -1: bracket is 1, z-integral exp(-1-y).
    const double below = oracle::trapezoid([&](double y) { return yr(y) * std::exp(-1.0 - y); }, 0.0, 1.0, 2000);
    CHECK_THAT(lib, WithinAbs(square + below, 1e-5));
}

TEST_CASE("theta = 0 consistency") {
    const RefractedModel models[] = {fx::refracted(fx::cl1(), 0.5), fx::refracted(fx::cl1(), 1.5),
                                     fx::refracted(fx::bm1(), 0.5), fx::refracted(fx::bm1(), 0.0),
                                     fx::refracted(fx::bm0(), 0.0), fx::refracted(fx::point_mass(), 0.5),
                                     fx::refracted(fx::cl1(), 0.5, 1.3)};
    for (const auto& m : models) {
        for (auto [dl, dh] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {0.5, 3.0}, {3.0, 0.4}}) {
            const auto r = theorem1_lt(m, 0.0, m.b() - dl, m.b() + dh);
            INFO("delta=" << m.delta() << " sigma2=" << m.x().sigma2() << " lo=" << -dl << " hi=" << dh);
            CHECK(rel_diff(r.numerator, r.denominator) <= 1e-8);
            CHECK_THAT(r.value, WithinAbs(1.0, 1e-8));
        }
    }
}

TEST_CASE("theta = 0 hand values for Brownian motion without refraction") {
    const auto bm0 = fx::refracted(fx::bm0(), 0.0);
    for (auto [dl, dh] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {0.5, 3.0}}) {
        const auto r = theorem1_lt(bm0, 0.0, -dl, dh);
        const double hand = 1.0 / dh + 1.0 / dl;
        CHECK_THAT(r.numerator, WithinRel(hand, 1e-10));
        CHECK_THAT(r.denominator, WithinRel(hand, 1e-10));
    }
    const auto bm1 = fx::refracted(fx::bm1(), 0.0);
    for (auto [dl, dh] : {std::pair{1.0, 1.0}, {0.5, 3.0}}) {
        const auto r = theorem1_lt(bm1, 0.0, -dl, dh);
        const double hand = 1.0 / -std::expm1(-dh) + std::exp(-dl) / -std::expm1(-dl);
        CHECK_THAT(r.numerator, WithinRel(hand, 1e-10));
        CHECK_THAT(r.denominator, WithinRel(hand, 1e-10));
    }
}

TEST_CASE("limit nesting") {
    const auto cl15 = fx::refracted(fx::cl1(), 1.5);
    for (double th : {0.5, 2.0}) {
        const double down = corollary1_down_lt(cl15, th, -1.0).value;
        CHECK(rel_diff(theorem1_lt(cl15, th, -1.0, 30.0).value, down) <= 1e-3);
    }
    const RefractedModel ups[] = {fx::refracted(fx::cl1(), 0.5), fx::refracted(fx::bm1(), 0.5), cl15};
    for (const auto& m : ups) {
        for (double th : {0.5, 2.0}) {
            const double up = corollary1_up_lt(m, th, 1.0).value;
            CHECK(rel_diff(theorem1_lt(m, th, -30.0, 1.0).value, up) <= 1e-3);
        }
    }
    const RefractedModel drifting[] = {fx::refracted(fx::cl1(), 0.5), fx::refracted(fx::bm1(), 0.5)};
    for (const auto& m : drifting) {
        for (double th : {0.5, 2.0}) {
            const double total = corollary2_lt(m, th);
            CHECK(rel_diff(corollary1_up_lt(m, th, 30.0).value, total) <= 1e-3);
            CHECK(rel_diff(corollary1_down_lt(m, th, -30.0).value, total) <= 1e-3);
        }
    }
}

TEST_CASE("one-sided lower transform at theta = 0 when Y drifts down") {
    const auto cl15 = fx::refracted(fx::cl1(), 1.5);
    CHECK_THAT(corollary1_down_lt(cl15, 0.0, -1.0).value, WithinAbs(1.0, 1e-8));
}

TEST_CASE("total occupation") {
    CHECK(corollary2_lt(fx::refracted(fx::bm1(), 0.5), 0.0) == 1.0);
    CHECK_THAT(corollary2_lt(fx::refracted(fx::bm1(), 0.5), 1e-9), WithinAbs(1.0, 1e-6));
    CHECK_THAT(corollary2_lt(fx::refracted(fx::bm1(), 0.5), 2.0), WithinRel(1.0 / 3.0, 1e-12));
    CHECK_THAT(corollary2_lt(fx::refracted(fx::cl1(), 0.5), 1e8), WithinRel(1.0 / 3.0, 1e-4));
    CHECK_THROWS_AS(corollary2_lt(fx::refracted(fx::cl1(), 1.5), 1.0), DomainError);
    CHECK_THROWS_AS(corollary2_lt(fx::refracted(fx::bm1(), 1.0), 1.0), DomainError);
}

TEST_CASE("Sparre-Andersen limit") {
    const LevyModel xs[] = {fx::cl1(), fx::bm1()};
    for (const auto& x : xs) {
        for (double th : {0.5, 1.0, 2.0}) {
            const double sa = psi_prime_at_zero(x) * big_phi(x, th) / th;
            CHECK(rel_diff(corollary2_lt(fx::refracted(x, 1e-6), th), sa) <= 1e-4);
            CHECK_THAT(corollary2_lt(fx::refracted(x, 0.0), th), WithinRel(sa, 1e-14));
        }
    }
}

TEST_CASE("values in (0, 1] and nonincreasing in theta") {
    const RefractedModel models[] = {fx::refracted(fx::cl1(), 0.5), fx::refracted(fx::cl1(), 1.5),
                                     fx::refracted(fx::bm1(), 0.5), fx::refracted(fx::point_mass(), 0.5)};
    for (const auto& m : models) {
        const double drift = psi_prime_at_zero(m.x()) - m.delta();
        std::vector<OccupationQuery> qs{{0, -1.0, 1.0}, {0, -kInf, 1.0}, {0, -1.5, kInf}};
        if (drift > 0.0) qs.push_back({0, -kInf, kInf});
        for (auto q : qs) {
            double prev = 1.0;
            for (int i = 0; i < 20; ++i) {
                q.theta = 0.25 * i;
                const double v = occupation_lt(m, q).value;
                CHECK(v > 0.0);
                CHECK(v <= 1.0);
                CHECK(v <= prev + 1e-12);
                prev = v;
            }
        }
    }
}

TEST_CASE("monotone in the barriers") {
    const auto cl = fx::refracted(fx::cl1(), 0.5);
    double prev = 1.0;
    for (double hi : {0.5, 1.0, 2.0, 4.0}) {
        const double v = theorem1_lt(cl, 1.0, -1.0, hi).value;
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
    prev = 1.0;
    for (double lo : {-0.5, -1.0, -2.0, -4.0}) {
        const double v = theorem1_lt(cl, 1.0, lo, 1.0).value;
        CHECK(v <= prev + 1e-12);
        prev = v;
    }
}

TEST_CASE("numeric backend gives the same transforms") {
    LtOptions num;
    num.backend = ScaleBackend::numeric;
    const RefractedModel models[] = {fx::refracted(fx::cl1(), 0.5), fx::refracted(fx::bm1(), 0.5)};
    for (const auto& m : models) {
        for (auto q : {OccupationQuery{1.0, -1.0, 1.0}, OccupationQuery{0.5, -kInf, 2.0},
                       OccupationQuery{2.0, -2.0, kInf}}) {
            const double a = occupation_lt(m, q).value, b = occupation_lt(m, q, num).value;
            CHECK(rel_diff(a, b) <= 1e-6);
        }
    }
    const auto pm = fx::refracted(fx::point_mass(), 0.5);
    const auto r = theorem1_lt(pm, 1.0, -1.0, 1.0);
    CHECK(r.value > 0.0);
    CHECK(r.value < 1.0);
}

TEST_CASE("Parisian ruin") {
    const auto cl = fx::refracted(fx::cl1(), 0.5);
    CHECK(parisian_ruin(cl, 1e-12) < 1e-9);
    CHECK_THAT(parisian_ruin(cl, 1e8), WithinRel(2.0 / 3.0, 1e-4));
    CHECK_THAT(parisian_ruin(fx::refracted(fx::bm1(), 0.5), 2.0), WithinRel(2.0 / 3.0, 1e-12));
    CHECK_THROWS_AS(parisian_ruin(fx::refracted(fx::cl1(), 0.5, 1.0), 1.0), DomainError);
    CHECK_THROWS_AS(parisian_ruin(cl, 0.0), DomainError);
}

TEST_CASE("query validation") {
    const auto cl = fx::refracted(fx::cl1(), 0.5);
    CHECK_THROWS_AS(theorem1_lt(cl, 1.0, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(theorem1_lt(cl, 1.0, -1.0, 0.0), DomainError);
    CHECK_THROWS_AS(theorem1_lt(cl, -1.0, -1.0, 1.0), DomainError);
    CHECK_THROWS_AS(theorem1_lt(fx::refracted(fx::bm1(), 0.5), 1.0, -1.0, 1e-8), DomainError);
    CHECK_THROWS_AS(theorem1_lt(cl, 1.0, -kInf, 1.0), DomainError);
}
