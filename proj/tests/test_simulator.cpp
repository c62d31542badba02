#include <catch_amalgamated.hpp>

#include <algorithm>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "refract/errors.hpp"
#include "refract/simulator.hpp"

using namespace refract;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

struct Proportion {
    double p, se;
};

template <class Pred>
Proportion proportion(const std::vector<PathOutcome>& v, Pred pred) {
    const double n = static_cast<double>(v.size());
    const double k = static_cast<double>(std::count_if(v.begin(), v.end(), pred));
    const double p = k / n;
    return {p, std::sqrt(p * (1.0 - p) / n)};
}

// Discrete monitoring shifts a barrier outward by about beta sigma sqrt(h).
constexpr double kBeta = 0.5825971579390106;

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
          A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
          A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("blocked Philox matches the single-block function") {
    std::uint32_t out[32];
    const std::array<std::uint32_t, 2> key{0x12345678u, 0x9abcdef0u};
    const std::uint64_t first = 0xfffffffcull;
    philox4x32_blocks<8>(first, 7u, 9u, key, out);
    for (int i = 0; i < 8; ++i) {
        const std::uint64_t c = first + i;
        const auto ref = oracle::philox_reference(
            {static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32), 7u, 9u}, key);
        for (int j = 0; j < 4; ++j) CHECK(out[4 * i + j] == ref[j]);
    }
}

TEST_CASE("path streams are reproducible and distinct") {
    PathRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
    bool differ_c = false, differ_d = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a(), y = b(), z = c(), w = d();
        CHECK(x == y);
        differ_c |= x != z;
        differ_d |= x != w;
    }
    CHECK(differ_c);
    CHECK(differ_d);
    PathRng u(1, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    CHECK_THAT(sum / 1e5, WithinAbs(0.5, 4e-3));
}

TEST_CASE("deterministic branch without jumps") {
    const RefractedModel m(LevyModel(3.0, 0.0, JumpSpec::none()), 1.0, 0.0);
    PathRng rng(1, 0);
    const auto o = simulate_exact_bv(m, -1.0, 2.0, rng);
    CHECK(o.exit == ExitKind::hit_hi);
    CHECK_THAT(o.exit_time, WithinRel(1.0, 1e-14));
    CHECK(o.occupation_below_b == 0.0);
    CHECK(o.final_value == 2.0);
}

TEST_CASE("a jump past lo exits immediately with no occupation") {
    const RefractedModel m(LevyModel::from_bv_drift(2.0, {1.0, JumpLaw(PointMassLaw{5.0})}), 0.5, 0.0);
    const Window w{-1.0, 3.0};
    const auto out = simulate_paths_serial(m, std::span(&w, 1), 2000, Scheme::exact(), 5);
    for (const auto& o : out) {
        CHECK(o.occupation_below_b == 0.0);
        if (o.exit == ExitKind::hit_lo) CHECK(o.final_value <= -1.0);
    }
    CHECK(std::any_of(out.begin(), out.end(), [](const auto& o) { return o.exit == ExitKind::hit_lo; }));
}

TEST_CASE("outcome invariants") {
    const RefractedModel models[] = {fx::refracted(fx::cl1(), 0.5), fx::refracted(fx::point_mass(), 1.0)};
    for (const auto& m : models) {
        const Window w{-2.0, 2.0};
        for (const auto& sch : {Scheme::exact(), Scheme::euler(1e-2)}) {
            const auto out = simulate_paths_parallel(m, std::span(&w, 1), 3000, sch, 11);
            for (const auto& o : out) {
                CHECK(o.occupation_below_b >= 0.0);
                CHECK(o.occupation_below_b <= o.exit_time * (1.0 + 1e-12));
                if (o.exit == ExitKind::hit_hi) {
                    CHECK(o.final_value >= 2.0);
                    if (sch.kind == SchemeKind::exact_bv) CHECK(o.final_value == 2.0);
                }
                if (o.exit == ExitKind::hit_lo) CHECK(o.final_value <= -2.0);
            }
        }
    }
}

TEST_CASE("exact scheme: probability of leaving through hi") {
    // Excursions straight to hi over all terminating excursions: 1/WW(hi-b) over the
    // theta = 0 denominator.
    const auto m = fx::refracted(fx::cl1(), 0.5);
    const auto r = theorem1_lt(m, 0.0, -2.0, 2.0);
    const oracle::ExpJumps yw{1.5, 1.0, 0.0};
    const double expect = (1.0 / yw.w(2.0)) / r.denominator;
    const Window w{-2.0, 2.0};
    const auto out = simulate_paths_parallel(m, std::span(&w, 1), 100000, Scheme::exact(), 2024);
    const auto p = proportion(out, [](const auto& o) { return o.exit == ExitKind::hit_hi; });
    CHECK(std::abs(p.p - expect) <= 3.0 * p.se);
}

TEST_CASE("Euler scheme: Brownian two-sided exit") {
    // delta = 0: U is X itself. Scale-function oracle at continuity-corrected barriers.
    const double h = 1e-4, shift = kBeta * std::sqrt(2.0) * std::sqrt(h);
    const auto m = fx::refracted(fx::bm1(), 0.0, 0.5);
    const Window w{0.0, 1.0};
    const auto out = simulate_paths_parallel(m, std::span(&w, 1), 40000, Scheme::euler(h), 99);
    const double lo = -shift, hi = 1.0 + shift, x = 0.5 - lo, up = hi - lo;

    const oracle::Brownian w0{1.0, 2.0, 0.0};
    const auto p = proportion(out, [](const auto& o) { return o.exit == ExitKind::hit_hi; });
    CHECK(std::abs(p.p - w0.w(x) / w0.w(up)) <= 3.0 * p.se);

    // E_x[exp(-2 tau-); tau- < tau+] = Z(x) - Z(up) W(x)/W(up) with q = 2.
    const oracle::Brownian w2{1.0, 2.0, 2.0};
    const double expect = w2.z(x) - w2.z(up) * w2.w(x) / w2.w(up);
    double sum = 0.0, sq = 0.0;
    for (const auto& o : out) {
        const double v = o.exit == ExitKind::hit_lo ? std::exp(-2.0 * o.exit_time) : 0.0;
        sum += v;
        sq += v * v;
    }
    const double n = static_cast<double>(out.size()), mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / n);
    CHECK(std::abs(mean - expect) <= 3.0 * se);
}

TEST_CASE("serial and parallel runs are identical") {
    const auto m = fx::refracted(fx::cl1(), 0.5);
    const std::vector<Window> ws{{-2.0, 2.0}, {-1.0, 1.0}, {-kInf, 2.0}, {-2.0, 20.0}};
    for (const auto& sch : {Scheme::exact(), Scheme::euler(1e-2)}) {
        const auto a = simulate_paths_serial(m, ws, 2000, sch, 77);
        const auto b = simulate_paths_parallel(m, ws, 2000, sch, 77);
        REQUIRE(a.size() == b.size());
        REQUIRE(a.size() == 2000 * ws.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].occupation_below_b == b[i].occupation_below_b);
            CHECK(a[i].exit == b[i].exit);
            CHECK(a[i].exit_time == b[i].exit_time);
            CHECK(a[i].final_value == b[i].final_value);
        }
        const auto c = simulate_paths_parallel(m, ws, 2000, sch, 78);
        bool differ = false;
        for (std::size_t i = 0; i < a.size(); ++i) differ |= a[i].exit_time != c[i].exit_time;
        CHECK(differ);
    }
}

TEST_CASE("multi-window paths agree with single-window paths") {
    const auto m = fx::refracted(fx::cl1(), 0.5);
    const std::vector<Window> ws{{-2.0, 2.0}, {-1.0, 1.0}};
    const auto both = simulate_paths_serial(m, ws, 500, Scheme::exact(), 3);
    for (std::size_t k = 0; k < ws.size(); ++k) {
        const auto one = simulate_paths_serial(m, std::span(&ws[k], 1), 500, Scheme::exact(), 3);
        for (std::size_t p = 0; p < 500; ++p) {
            CHECK(one[p].occupation_below_b == both[p * 2 + k].occupation_below_b);
            CHECK(one[p].exit == both[p * 2 + k].exit);
        }
    }
}

TEST_CASE("Euler with sigma^2 = 0 matches the exact scheme in distribution") {
    const auto m = fx::refracted(fx::cl1(), 0.5);
    const Window w{-2.0, 2.0};
    const auto ex = simulate_paths_parallel(m, std::span(&w, 1), 10000, Scheme::exact(), 1);
    const auto eu = simulate_paths_parallel(m, std::span(&w, 1), 10000, Scheme::euler(1e-3), 2);
    std::vector<double> a, b;
    for (const auto& o : ex) a.push_back(o.occupation_below_b);
    for (const auto& o : eu) b.push_back(o.occupation_below_b);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(oracle::ks_statistic(a, b) <= 0.02);
}

TEST_CASE("Laplace estimates") {
    const auto m = fx::refracted(fx::cl1(), 0.5);
    const auto e0 = mc_laplace(m, {0.0, -2.0, 2.0}, 1000, Scheme::exact(), 1);
    CHECK(e0.mean == 1.0);
    CHECK(e0.std_error == 0.0);
    CHECK(e0.n == 1000);
    CHECK(e0.scheme == "exact-bv");
    CHECK(Scheme::euler(1e-3).label() == "euler(0.001)");

    const auto e = mc_laplace(m, {0.5, -2.0, 2.0}, 50000, Scheme::exact(), 8);
    const double a = theorem1_lt(m, 0.5, -2.0, 2.0).value;
    CHECK(std::abs(e.mean - a) <= 3.0 * e.std_error);

    const auto bm = fx::refracted(fx::bm1(), 0.0);
    const auto eb = mc_laplace(bm, {1.0, -1.0, 1.0}, 5000, Scheme::euler(1e-3), 4);
    CHECK(std::abs(eb.mean - theorem1_lt(bm, 1.0, -1.0, 1.0).value) <= std::max(3.0 * eb.std_error, 2e-2));

    const auto b = mc_laplace_batch(m, std::vector<OccupationQuery>{{0.5, -2.0, 2.0}, {2.0, -2.0, 2.0}}, 50000,
                                    Scheme::exact(), 8);
    CHECK(b[0].mean == e.mean);
}

TEST_CASE("stop level") {
    const auto m = fx::refracted(fx::cl1(), 0.5);
    const double M = stop_level(m, 1e-4);
    const oracle::ExpJumps yw{1.5, 1.0, 0.0};
    CHECK(1.0 - 0.5 * yw.w(M) <= 1e-4);
    CHECK(1.0 - 0.5 * yw.w(0.99 * M) > 1e-4);
    const auto rw = resolve_window(m, {1.0, -kInf, kInf});
    CHECK(rw.window.hi == M);
    CHECK(rw.bias_bound == 1e-4);
    CHECK_THROWS_AS(stop_level(fx::refracted(fx::cl1(), 1.5)), DomainError);
    CHECK_THROWS_AS(resolve_window(fx::refracted(fx::cl1(), 1.5), {1.0, -kInf, kInf}), DomainError);
}

TEST_CASE("horizon hits are reported") {
    const auto m = fx::refracted(fx::cl1(), 0.5);
    Scheme s = Scheme::exact();
    s.t_max = 0.5;
    const auto e = mc_laplace(m, {1.0, -20.0, 20.0}, 200, s, 1);
    CHECK(e.horizon_hits > 0);
    Scheme bad = Scheme::euler(0.0);
    CHECK_THROWS(mc_laplace(m, {1.0, -1.0, 1.0}, 10, bad, 1));
    CHECK_THROWS(mc_laplace(fx::refracted(fx::bm1(), 0.5), {1.0, -1.0, 1.0}, 10, Scheme::exact(), 1));
}

TEST_CASE("sample magnitudes") {
    PathRng rng(5, 5);
    const JumpLaw law(ErlangLaw{3, 0.6});
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += sample_magnitude(law, rng);
    CHECK_THAT(sum / 1e5, WithinAbs(0.6, 0.6 / std::sqrt(3.0) / std::sqrt(1e5) * 4.0));
    const JumpLaw pm(PointMassLaw{2.5});
    CHECK(sample_magnitude(pm, rng) == 2.5);
}
