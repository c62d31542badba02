#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "refract/levy_model.hpp"
#include "refract/occupation.hpp"
#include "refract/philox.hpp"

namespace refract {

enum class ExitKind { hit_hi, hit_lo, horizon };

const char* to_string(ExitKind e);

struct PathOutcome {
    double occupation_below_b = 0.0;
    ExitKind exit = ExitKind::horizon;
    double exit_time = 0.0;
    double final_value = 0.0;
};

enum class SchemeKind { exact_bv, euler };

struct Scheme {
    SchemeKind kind = SchemeKind::exact_bv;
    double h = 1e-3;
    double t_max = 1e4;

    static Scheme exact() { return {}; }
    static Scheme euler(double step) { return {SchemeKind::euler, step}; }
    /// "exact-bv" or "euler(h)"
    std::string label() const;
};

/// Exit window (lo, hi) of one path; lo may be -inf, hi may be +inf.
/// A path whose occupation reaches occupation_cap stops with exit = horizon.
struct Window {
    double lo;
    double hi;
    double occupation_cap = kInf;
};

/// Exact piecewise-linear path of a bounded-variation refracted process from b.
PathOutcome simulate_exact_bv(const RefractedModel& rmodel, double lo, double hi, PathRng& rng,
                              double t_max = 1e4);
/// One path serving several windows: out[i] is the outcome for windows[i].
void simulate_exact_bv(const RefractedModel& rmodel, std::span<const Window> windows, PathRng& rng,
                       std::span<PathOutcome> out, double t_max = 1e4);

/// Euler-Maruyama path with exact jump epochs.
PathOutcome simulate_euler(const RefractedModel& rmodel, double lo, double hi, double h, PathRng& rng,
                           double t_max = 1e4);
void simulate_euler(const RefractedModel& rmodel, std::span<const Window> windows, double h, PathRng& rng,
                    std::span<PathOutcome> out, double t_max = 1e4);

/// Outcomes of paths 0..n-1, row-major [path][window]. Both give identical results.
std::vector<PathOutcome> simulate_paths_serial(const RefractedModel& rmodel, std::span<const Window> windows,
                                               std::size_t n, const Scheme& scheme, std::uint64_t seed);
std::vector<PathOutcome> simulate_paths_parallel(const RefractedModel& rmodel, std::span<const Window> windows,
                                                 std::size_t n, const Scheme& scheme, std::uint64_t seed);

/// Level M >= b beyond which the probability of returning below b is at most tol:
/// 1 - (psi'(0+) - delta) WW(M - b) <= tol. Requires psi'(0+) > delta.
double stop_level(const RefractedModel& rmodel, double tol = 1e-4);

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string scheme;
    /// Bound on the bias from stopping at the level M or from the occupation cap.
    double bias_bound = 0.0;
    std::size_t horizon_hits = 0;
    /// Window actually simulated.
    double lo = 0.0;
    double hi = 0.0;
};

/// Simulation window and bias bound used for one query.
struct ResolvedWindow {
    Window window;
    double bias_bound;
};
ResolvedWindow resolve_window(const RefractedModel& rmodel, const OccupationQuery& query);

/// Mean of exp(-theta * occupation) for one query.
MCEstimate mc_laplace(const RefractedModel& rmodel, const OccupationQuery& query, std::size_t n,
                      const Scheme& scheme, std::uint64_t seed, bool parallel = true);

/// Several queries from one set of paths; queries that share a window share its outcomes.
std::vector<MCEstimate> mc_laplace_batch(const RefractedModel& rmodel, std::span<const OccupationQuery> queries,
                                         std::size_t n, const Scheme& scheme, std::uint64_t seed,
                                         bool parallel = true);

/// Estimate for window index w from row-major outcomes.
MCEstimate estimate_from(std::span<const PathOutcome> outcomes, std::size_t n_windows, std::size_t w, double theta);

/// Draws one jump magnitude.
double sample_magnitude(const JumpLaw& law, PathRng& rng);

}  // namespace refract
