#include "refract/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <omp.h>

#include "refract/errors.hpp"
#include "refract/model_io.hpp"
#include "refract/occupation.hpp"
#include "refract/scale_functions.hpp"
#include "refract/simulator.hpp"
#include "refract/validation.hpp"

namespace refract {

void apply_thread_limit() {
    const char* env = std::getenv("REFRACT_THREADS");
    if (!env || !*env) return;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError("REFRACT_THREADS must be a positive integer");
    omp_set_num_threads(static_cast<int>(std::min<long>(n, omp_get_num_procs() * 4L)));
}

namespace {

struct Sink {
    std::ostream& fallback;
    std::ofstream file;
    std::ostream& get() { return file.is_open() ? static_cast<std::ostream&>(file) : fallback; }
};

void open_sink(Sink& s, const std::string& path) {
    if (path.empty()) return;
    s.file.open(path);
    if (!s.file) throw ConfigError("cannot write " + path);
    s.file << std::setprecision(12);
}

void write_plot(const std::string& path, const std::string& xlabel, const std::string& ylabel,
                const std::vector<std::pair<double, double>>& pts) {
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write " + path);
    f << std::setprecision(12) << xlabel << ',' << ylabel << '\n';
    for (const auto& [x, y] : pts) f << x << ',' << y << '\n';
}

struct ScaleArgs {
    std::string model, backend = "auto", exponent = "x", out, plot;
    double q = 0.0, xmax = 0.0;
    int points = 100;
};

struct LtArgs {
    std::string model, lo, hi, which = "both", out, plot;
    std::vector<double> theta;
};

struct DensityArgs {
    std::string model, out, plot;
    int points = 400, n_terms = 30;
    double tail_tol = 1e-4;
};

struct SimArgs {
    std::string model, lo = "-inf", hi = "inf", scheme = "exact", out, paths_csv;
    double theta = 0.0, h = 1e-3, t_max = 1e4;
    std::size_t n = 10000;
    std::uint64_t seed = 0;
};

struct ValidateArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
};

int cmd_scale(const ScaleArgs& a, std::ostream& out) {
    const RefractedModel m = read_model_file(a.model);
    const LevyModel& exp = a.exponent == "y" ? m.y() : m.x();
    if (!(a.xmax > 0.0)) throw ConfigError("--xmax must be > 0");
    if (a.points < 1) throw ConfigError("--points must be >= 1");
    const auto set = a.backend == "auto" ? ScaleFunctionSet::automatic(exp, a.q)
                                         : ScaleFunctionSet(exp, a.q, a.backend == "rational" ? ScaleBackend::rational
                                                                                              : ScaleBackend::numeric);
    Sink sink{out, {}};
    open_sink(sink, a.out);
    std::ostream& o = sink.get();
    o << "x,w,w_prime,z\n";
    std::vector<std::pair<double, double>> plot;
    for (int i = 1; i <= a.points; ++i) {
        const double x = a.xmax * i / a.points;
        const double w = set.w(x);
        o << x << ',' << w << ',' << set.w_prime(x) << ',' << set.z(x) << '\n';
        plot.emplace_back(x, w);
    }
    write_plot(a.plot, "x", "w", plot);
    return 0;
}

int cmd_lt(const LtArgs& a, std::ostream& out) {
    const RefractedModel m = read_model_file(a.model);
    const Which which = which_from_string(a.which);
    double lo = -kInf, hi = kInf;
    if (which == Which::both || which == Which::down) {
        if (a.lo.empty()) throw ConfigError("--lo is required for --which " + a.which);
        lo = parse_level(a.lo);
    }
    if (which == Which::both || which == Which::up) {
        if (a.hi.empty()) throw ConfigError("--hi is required for --which " + a.which);
        hi = parse_level(a.hi);
    }
    if (which == Which::both && (!std::isfinite(lo) || !std::isfinite(hi)))
        throw ConfigError("--which both needs finite --lo and --hi");
    Sink sink{out, {}};
    open_sink(sink, a.out);
    std::ostream& o = sink.get();
    o << "theta,value,numerator,denominator,quad_error\n";
    std::vector<std::pair<double, double>> plot;
    for (double th : a.theta) {
        const LaplaceResult r = occupation_lt(m, {th, lo, hi});
        o << th << ',' << r.value << ',' << r.numerator << ',' << r.denominator << ',' << r.quad_error << '\n';
        plot.emplace_back(th, r.value);
    }
    write_plot(a.plot, "theta", "value", plot);
    return 0;
}

int cmd_density(const DensityArgs& a, std::ostream& out) {
    const RefractedModel m = read_model_file(a.model);
    DensityOptions opts;
    opts.points = a.points;
    opts.n_terms = a.n_terms;
    opts.tail_tol = a.tail_tol;
    const OccupationDensity d = occupation_density(m, opts);
    Sink sink{out, {}};
    open_sink(sink, a.out);
    std::ostream& o = sink.get();
    o << "# atom0=" << d.atom0 << '\n';
    o << "x,density\n";
    std::vector<std::pair<double, double>> plot;
    for (std::size_t i = 0; i < d.x.size(); ++i) {
        o << d.x[i] << ',' << d.density[i] << '\n';
        plot.emplace_back(d.x[i], d.density[i]);
    }
    write_plot(a.plot, "x", "density", plot);
    return 0;
}

int cmd_simulate(const SimArgs& a, std::ostream& out) {
    const RefractedModel m = read_model_file(a.model);
    Scheme scheme;
    if (a.scheme == "exact") scheme = Scheme::exact();
    else if (a.scheme == "euler") scheme = Scheme::euler(a.h);
    else throw ConfigError("--scheme must be exact or euler");
    scheme.t_max = a.t_max;
    const OccupationQuery q{a.theta, parse_level(a.lo), parse_level(a.hi)};
    const ResolvedWindow rw = resolve_window(m, q);
    const Window w = rw.window;
    const auto outcomes = simulate_paths_parallel(m, std::span<const Window>(&w, 1), a.n, scheme, a.seed);
    MCEstimate e = estimate_from(outcomes, 1, 0, a.theta);
    json j{{"mean", e.mean},
           {"stderr", e.std_error},
           {"n", a.n},
           {"seed", a.seed},
           {"scheme", scheme.label()},
           {"theta", a.theta},
           {"lo", std::isfinite(w.lo) ? json(w.lo) : json(nullptr)},
           {"hi", std::isfinite(w.hi) ? json(w.hi) : json(nullptr)},
           {"bias_bound", rw.bias_bound},
           {"horizon_hits", e.horizon_hits},
           {"model", model_to_json(m)}};
    Sink sink{out, {}};
    open_sink(sink, a.out);
    sink.get() << j.dump(2) << '\n';
    if (!a.paths_csv.empty()) {
        std::ofstream f(a.paths_csv);
        if (!f) throw ConfigError("cannot write " + a.paths_csv);
        f << std::setprecision(12) << "occupation,exit,exit_time\n";
        for (const auto& o : outcomes) f << o.occupation_below_b << ',' << to_string(o.exit) << ',' << o.exit_time << '\n';
    }
    return 0;
}

int cmd_validate(const ValidateArgs& a, std::ostream& out) {
    const ValidationConfig cfg = validation_config_from_json(read_json_file(a.config));
    const ValidationReport rep = run_validation(cfg, a.seed);
    Sink sink{out, {}};
    open_sink(sink, a.out);
    sink.get() << report_to_json(rep).dump(2) << '\n';
    return rep.failed == 0 ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"refracted Levy process occupation times"};
    app.require_subcommand(1);
    out << std::setprecision(12);

    ScaleArgs sa;
    auto* scale = app.add_subcommand("scale", "tabulate W, W' and Z on x = i*xmax/points");
    scale->add_option("--model", sa.model, "model JSON")->required();
    scale->add_option("--q", sa.q, "q >= 0");
    scale->add_option("--xmax", sa.xmax)->required();
    scale->add_option("--points", sa.points);
    scale->add_option("--backend", sa.backend)->check(CLI::IsMember({"auto", "rational", "numeric"}));
    scale->add_option("--exponent", sa.exponent, "x: psi, y: psi - delta theta")->check(CLI::IsMember({"x", "y"}));
    scale->add_option("--out", sa.out, "CSV path (default stdout)");
    scale->add_option("--emit-plot-data", sa.plot, "write (x, w) series");

    LtArgs la;
    auto* lt = app.add_subcommand("lt", "occupation Laplace transforms");
    lt->add_option("--model", la.model)->required();
    lt->add_option("--theta", la.theta, "theta values")->required()->delimiter(',');
    lt->add_option("--lo", la.lo, "lower level (may be -inf)");
    lt->add_option("--hi", la.hi, "upper level (may be inf)");
    lt->add_option("--which", la.which)->check(CLI::IsMember({"both", "up", "down", "total"}));
    lt->add_option("--out", la.out);
    lt->add_option("--emit-plot-data", la.plot, "write (theta, value) series");

    DensityArgs da;
    auto* density = app.add_subcommand("density", "law of the total occupation below b");
    density->add_option("--model", da.model)->required();
    density->add_option("--points", da.points);
    density->add_option("--n-terms", da.n_terms);
    density->add_option("--tail-tol", da.tail_tol);
    density->add_option("--out", da.out);
    density->add_option("--emit-plot-data", da.plot, "write (x, density) series");

    SimArgs ma;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of one transform");
    sim->set_help_flag("--help", "print this help");
    sim->add_option("--model", ma.model)->required();
    sim->add_option("--theta", ma.theta)->required();
    sim->add_option("--lo", ma.lo);
    sim->add_option("--hi", ma.hi);
    sim->add_option("--n", ma.n);
    sim->add_option("--scheme", ma.scheme)->check(CLI::IsMember({"exact", "euler"}));
    sim->add_option("--h", ma.h);
    sim->add_option("--t-max", ma.t_max);
    sim->add_option("--seed", ma.seed);
    sim->add_option("--out", ma.out);
    sim->add_option("--paths-csv", ma.paths_csv, "per-path occupation,exit,exit_time");

    ValidateArgs va;
    std::uint64_t seed = 0;
    auto* val = app.add_subcommand("validate", "analytic against Monte Carlo");
    val->add_option("--config", va.config)->required();
    auto* seed_opt = val->add_option("--seed", seed);
    val->add_option("--out", va.out);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        apply_thread_limit();
        if (scale->parsed()) return cmd_scale(sa, out);
        if (lt->parsed()) return cmd_lt(la, out);
        if (density->parsed()) return cmd_density(da, out);
        if (sim->parsed()) return cmd_simulate(ma, out);
        if (val->parsed()) {
            if (seed_opt->count() > 0) va.seed = seed;
            return cmd_validate(va, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace refract
