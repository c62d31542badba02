#include "refract/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include <boost/random/normal_distribution.hpp>

#include "refract/errors.hpp"
#include "refract/scale_functions.hpp"

namespace refract {

const char* to_string(ExitKind e) {
    switch (e) {
        case ExitKind::hit_hi: return "hit_hi";
        case ExitKind::hit_lo: return "hit_lo";
        case ExitKind::horizon: return "horizon";
    }
    return "?";
}

std::string Scheme::label() const {
    if (kind == SchemeKind::exact_bv) return "exact-bv";
    std::ostringstream os;
    os << "euler(" << h << ")";
    return os.str();
}

double sample_magnitude(const JumpLaw& law, PathRng& rng) {
    if (auto s = law.atom()) return *s;
    const auto comps = law.components();
    std::size_t i = 0;
    if (comps.size() > 1) {
        double u = rng.uniform();
        while (i + 1 < comps.size() && u > comps[i].weight) u -= comps[i++].weight;
    }
    double prod = 1.0;
    for (int k = 0; k < comps[i].shape; ++k) prod *= rng.uniform();
    return -std::log(prod) / comps[i].rate;
}

namespace {

void check_windows(const RefractedModel& rm, std::span<const Window> windows, std::span<PathOutcome> out) {
    if (windows.size() != out.size()) throw ConfigError("one outcome slot per window required");
    for (const auto& w : windows) {
        if (!(w.lo < rm.b() && rm.b() < w.hi)) throw DomainError("simulation window needs lo < b < hi");
    }
}

struct Tracker {
    std::span<const Window> windows;
    std::span<PathOutcome> out;
    std::vector<char> done;
    std::size_t active;

    Tracker(std::span<const Window> w, std::span<PathOutcome> o) : windows(w), out(o), done(w.size(), 0), active(w.size()) {
        for (auto& p : out) p = PathOutcome{};
    }
    void finish(std::size_t i, ExitKind e, double t, double occ, double value) {
        out[i] = {occ, e, t, value};
        done[i] = 1;
        --active;
    }
};

}  // namespace

void simulate_exact_bv(const RefractedModel& rmodel, std::span<const Window> windows, PathRng& rng,
                       std::span<PathOutcome> out, double t_max) {
    check_windows(rmodel, windows, out);
    const LevyModel& x = rmodel.x();
    if (!x.is_bv()) throw UnsupportedError("exact simulation needs a bounded-variation driver");
    const double c0 = x.c0();
    const double up = c0 - rmodel.delta();
    const double b = rmodel.b();
    const bool jumps = x.jumps().has_jumps();
    const double lam = x.jumps().rate();

    Tracker tr(windows, out);
    double u = b, t = 0.0, occ = 0.0;
    while (tr.active > 0) {
        const double tau = jumps ? rng.exponential(lam) : kInf;
        const double tb = u < b ? (b - u) / c0 : 0.0;
        auto occ_in = [&](double s) { return u < b ? std::min(s, tb) : 0.0; };
        auto pos = [&](double s) {
            if (u < b) return s <= tb ? u + c0 * s : b + up * (s - tb);
            return u + up * s;
        };
        auto time_to = [&](double level) {
            if (level <= u) return 0.0;
            if (u < b) return level <= b ? (level - u) / c0 : tb + (level - b) / up;
            return (level - u) / up;
        };
        const double seg = std::min(tau, t_max - t);
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (tr.done[i]) continue;
            const Window& w = windows[i];
            const double th = std::isfinite(w.hi) ? time_to(w.hi) : kInf;
            if (std::isfinite(w.occupation_cap) && occ + occ_in(std::min(th, seg)) >= w.occupation_cap) {
                const double s = w.occupation_cap - occ;
                tr.finish(i, ExitKind::horizon, t + s, w.occupation_cap, pos(s));
                continue;
            }
            if (th <= seg) tr.finish(i, ExitKind::hit_hi, t + th, occ + occ_in(th), w.hi);
        }
        if (tr.active == 0) break;
        if (t + tau >= t_max) {
            const double s = t_max - t;
            for (std::size_t i = 0; i < windows.size(); ++i)
                if (!tr.done[i]) tr.finish(i, ExitKind::horizon, t_max, occ + occ_in(s), pos(s));
            break;
        }
        occ += occ_in(tau);
        u = pos(tau) - sample_magnitude(x.jumps().law(), rng);
        t += tau;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (!tr.done[i] && u < windows[i].lo) tr.finish(i, ExitKind::hit_lo, t, occ, u);
        }
    }
}

PathOutcome simulate_exact_bv(const RefractedModel& rmodel, double lo, double hi, PathRng& rng, double t_max) {
    const Window w{lo, hi};
    PathOutcome o;
    simulate_exact_bv(rmodel, std::span<const Window>(&w, 1), rng, std::span<PathOutcome>(&o, 1), t_max);
    return o;
}

void simulate_euler(const RefractedModel& rmodel, std::span<const Window> windows, double h, PathRng& rng,
                    std::span<PathOutcome> out, double t_max) {
    if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("Euler step h must be > 0");
    if (!(t_max > 0.0)) throw ConfigError("horizon T_max must be > 0");
    check_windows(rmodel, windows, out);
    const LevyModel& x = rmodel.x();
    const double drift_below = x.linear_drift();
    const double drift_above = drift_below - rmodel.delta();
    const double sigma = std::sqrt(x.sigma2());
    const double b = rmodel.b();
    const bool jumps = x.jumps().has_jumps();
    const double lam = x.jumps().rate();
    const double sqrt_h = std::sqrt(h);
    boost::random::normal_distribution<double> normal;

    Tracker tr(windows, out);
    // Innermost bounds over the windows still running.
    double env_lo = -kInf, env_hi = kInf, env_cap = kInf;
    auto envelope = [&] {
        env_lo = -kInf;
        env_hi = env_cap = kInf;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (tr.done[i]) continue;
            env_lo = std::max(env_lo, windows[i].lo);
            env_hi = std::min(env_hi, windows[i].hi);
            env_cap = std::min(env_cap, windows[i].occupation_cap);
        }
    };
    envelope();
    double u = b, t = 0.0, occ = 0.0;
    double next_jump = jumps ? rng.exponential(lam) : kInf;
    while (tr.active > 0) {
        double dt = h;
        bool jump_now = false;
        if (next_jump - t <= h) {
            dt = next_jump - t;
            jump_now = true;
        }
        const bool at_horizon = t + dt >= t_max;
        if (at_horizon) {
            dt = t_max - t;
            jump_now = false;
        }
        if (u < b) occ += dt;
        u += (u > b ? drift_above : drift_below) * dt;
        if (sigma > 0.0) u += sigma * (dt == h ? sqrt_h : std::sqrt(dt)) * normal(rng);
        if (jump_now) {
            t = next_jump;
            u -= sample_magnitude(x.jumps().law(), rng);
            next_jump = t + rng.exponential(lam);
        } else {
            t += dt;
        }
        if (u > env_hi || u < env_lo || occ >= env_cap) {
            for (std::size_t i = 0; i < windows.size(); ++i) {
                if (tr.done[i]) continue;
                const Window& w = windows[i];
                if (u > w.hi) tr.finish(i, ExitKind::hit_hi, t, occ, u);
                else if (u < w.lo) tr.finish(i, ExitKind::hit_lo, t, occ, u);
                else if (occ >= w.occupation_cap) tr.finish(i, ExitKind::horizon, t, occ, u);
            }
            envelope();
        }
        if (at_horizon) {
            for (std::size_t i = 0; i < windows.size(); ++i)
                if (!tr.done[i]) tr.finish(i, ExitKind::horizon, t, occ, u);
        }
    }
}

PathOutcome simulate_euler(const RefractedModel& rmodel, double lo, double hi, double h, PathRng& rng,
                           double t_max) {
    const Window w{lo, hi};
    PathOutcome o;
    simulate_euler(rmodel, std::span<const Window>(&w, 1), h, rng, std::span<PathOutcome>(&o, 1), t_max);
    return o;
}

namespace {

void simulate_one(const RefractedModel& rm, std::span<const Window> windows, const Scheme& scheme,
                  std::uint64_t seed, std::size_t path, std::span<PathOutcome> out) {
    PathRng rng(seed, path);
    if (scheme.kind == SchemeKind::exact_bv) simulate_exact_bv(rm, windows, rng, out, scheme.t_max);
    else simulate_euler(rm, windows, scheme.h, rng, out, scheme.t_max);
}

void check_scheme(const RefractedModel& rm, const Scheme& scheme) {
    if (scheme.kind == SchemeKind::exact_bv && !rm.x().is_bv())
        throw ConfigError("exact scheme needs a bounded-variation driver (sigma2 = 0)");
}

}  // namespace

std::vector<PathOutcome> simulate_paths_serial(const RefractedModel& rmodel, std::span<const Window> windows,
                                               std::size_t n, const Scheme& scheme, std::uint64_t seed) {
    check_scheme(rmodel, scheme);
    const std::size_t k = windows.size();
    std::vector<PathOutcome> out(n * k);
    for (std::size_t p = 0; p < n; ++p)
        simulate_one(rmodel, windows, scheme, seed, p, std::span<PathOutcome>(out.data() + p * k, k));
    return out;
}

std::vector<PathOutcome> simulate_paths_parallel(const RefractedModel& rmodel, std::span<const Window> windows,
                                                 std::size_t n, const Scheme& scheme, std::uint64_t seed) {
    check_scheme(rmodel, scheme);
    const std::size_t k = windows.size();
    std::vector<PathOutcome> out(n * k);
    const auto count = static_cast<std::ptrdiff_t>(n);
    // Exceptions cannot cross the parallel region.
    std::string failure;
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t p = 0; p < count; ++p) {
        try {
            simulate_one(rmodel, windows, scheme, seed, static_cast<std::size_t>(p),
                         std::span<PathOutcome>(out.data() + static_cast<std::size_t>(p) * k, k));
        } catch (const std::exception& e) {
#pragma omp critical
            failure = e.what();
        }
    }
    if (!failure.empty()) throw Error(failure);
    return out;
}

double stop_level(const RefractedModel& rmodel, double tol) {
    const double d = psi_prime_at_zero(rmodel.x()) - rmodel.delta();
    if (!(d > 0.0)) throw DomainError("stop level needs psi'(0+) > delta");
    ScaleGridParams grid;
    for (int attempt = 0; attempt < 5; ++attempt, grid.extent *= 2.0) {
        const auto set = ScaleFunctionSet::automatic(rmodel.y(), 0.0, grid);
        auto gap = [&](double x) { return 1.0 - d * set.w(x); };
        try {
            double hi = 1.0;
            while (gap(hi) > tol) {
                hi *= 2.0;
                if (hi > 1e6) throw ConvergenceError("stop level: WW does not approach its limit");
            }
            double lo = 0.0;
            while (hi - lo > 1e-6 * hi) {
                const double mid = 0.5 * (lo + hi);
                (gap(mid) > tol ? lo : hi) = mid;
            }
            return rmodel.b() + hi;
        } catch (const RangeError&) {
        }
    }
    throw ConvergenceError("stop level beyond the numeric scale-function range");
}

ResolvedWindow resolve_window(const RefractedModel& rmodel, const OccupationQuery& q) {
    if (!(q.theta >= 0.0)) throw DomainError("theta must be >= 0");
    if (!(q.lo < rmodel.b() && rmodel.b() < q.hi)) throw DomainError("query needs lo < b < hi");
    const double d = psi_prime_at_zero(rmodel.x()) - rmodel.delta();
    const double tol = 1e-4;
    ResolvedWindow r{{q.lo, q.hi}, 0.0};
    if (!std::isfinite(q.hi)) {
        if (d > 0.0) {
            r.window.hi = stop_level(rmodel, tol);
            r.bias_bound = tol;
        } else if (!std::isfinite(q.lo)) {
            throw DomainError("total occupation needs psi'(0+) > delta");
        }
    }
    if (!std::isfinite(q.lo) && std::isfinite(q.hi) && psi_prime_at_zero(rmodel.x()) <= 0.0 && q.theta > 0.0) {
        // The first passage above hi may never happen; stop once exp(-theta occ) <= tol.
        r.window.occupation_cap = std::log(1.0 / tol) / q.theta;
        r.bias_bound = tol;
    }
    return r;
}

MCEstimate estimate_from(std::span<const PathOutcome> outcomes, std::size_t n_windows, std::size_t w, double theta) {
    MCEstimate e;
    const std::size_t n = n_windows == 0 ? 0 : outcomes.size() / n_windows;
    e.n = n;
    if (n == 0) return e;
    double sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const PathOutcome& o = outcomes[p * n_windows + w];
        sum += std::exp(-theta * o.occupation_below_b);
        if (o.exit == ExitKind::horizon) ++e.horizon_hits;
    }
    e.mean = sum / n;
    double ss = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double v = std::exp(-theta * outcomes[p * n_windows + w].occupation_below_b) - e.mean;
        ss += v * v;
    }
    e.std_error = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    return e;
}

std::vector<MCEstimate> mc_laplace_batch(const RefractedModel& rmodel, std::span<const OccupationQuery> queries,
                                         std::size_t n, const Scheme& scheme, std::uint64_t seed, bool parallel) {
    std::vector<ResolvedWindow> resolved;
    std::vector<Window> windows;
    std::vector<std::size_t> index;
    std::map<std::tuple<double, double, double>, std::size_t> seen;
    for (const auto& q : queries) {
        resolved.push_back(resolve_window(rmodel, q));
        const Window& w = resolved.back().window;
        const auto key = std::make_tuple(w.lo, w.hi, w.occupation_cap);
        auto it = seen.find(key);
        if (it == seen.end()) {
            it = seen.emplace(key, windows.size()).first;
            windows.push_back(w);
        }
        index.push_back(it->second);
    }
    std::vector<PathOutcome> outcomes;
    if (n > 0 && !windows.empty()) {
        outcomes = parallel ? simulate_paths_parallel(rmodel, windows, n, scheme, seed)
                            : simulate_paths_serial(rmodel, windows, n, scheme, seed);
    }
    std::vector<MCEstimate> est;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        MCEstimate e = estimate_from(outcomes, windows.size(), index[i], queries[i].theta);
        e.n = n;
        e.seed = seed;
        e.scheme = scheme.label();
        e.bias_bound = resolved[i].bias_bound;
        e.lo = resolved[i].window.lo;
        e.hi = resolved[i].window.hi;
        est.push_back(std::move(e));
    }
    return est;
}

MCEstimate mc_laplace(const RefractedModel& rmodel, const OccupationQuery& query, std::size_t n,
                      const Scheme& scheme, std::uint64_t seed, bool parallel) {
    return mc_laplace_batch(rmodel, std::span<const OccupationQuery>(&query, 1), n, scheme, seed, parallel).front();
}

}  // namespace refract
