#pragma once

// Command-line front end: solve, check, simulate, trace. Lives in a header so
// the tests can drive it in-process.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"

#include "bomber/bomber.hpp"
#include "bomber/report.hpp"

namespace bomber::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3 };

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// `XxT:NXxNT`, e.g. `10x10:201x201`.
inline GridSpec parse_grid(std::string_view s) {
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) throw UsageError("grid must look like XxT:NXxNT");
    auto pair = [](std::string_view p, const char* what) {
        const auto x = p.find('x');
        if (x == std::string_view::npos) throw UsageError(std::string(what) + " must be AxB");
        return std::pair{p.substr(0, x), p.substr(x + 1)};
    };
    auto [xs, ts] = pair(s.substr(0, colon), "grid extent");
    auto [nxs, nts] = pair(s.substr(colon + 1), "grid node counts");
    auto count = [](std::string_view v) {
        std::size_t n = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
            throw UsageError("cannot parse node count '" + std::string(v) + "'");
        }
        return n;
    };
    GridSpec g{bomber::detail::parse_double(xs, "x extent"), bomber::detail::parse_double(ts, "t extent"), count(nxs), count(nts)};
    g.validate();
    return g;
}

struct RunConfig {
    ModelKind model = ModelKind::bomber();
    std::optional<AmmoFunction> ammo;
    GridSpec grid{};
    SolveOpts solve{};
    std::uint64_t seed = 1;
    std::filesystem::path out_dir = ".";
};

inline Json to_json(const RunConfig& c) {
    return Json{{"model", to_string(c.model)},
                {"ammo", c.ammo ? to_string(*c.ammo) : std::string()},
                {"grid", to_string(c.grid)},
                {"tol", c.solve.tol},
                {"max_iter", c.solve.max_iter},
                {"init", to_string(c.solve.init)},
                {"seed", c.seed}};
}

namespace detail {

/// Flag values as typed on the command line, validated into a RunConfig.
struct RawFlags {
    std::string model = "bomber";
    std::string ammo;
    std::string grid;
    double tol = 1e-10;
    int max_iter = 200;
    std::string init = "sandwich";
    std::uint64_t seed = 1;
    std::string out = ".";
    std::size_t max_nodes = 4'000'000;
};

inline void add_common(CLI::App& sub, RawFlags& f, bool needs_model) {
    if (needs_model) sub.add_option("--model", f.model, "bomber | frail | invincible | fu:u=<p>");
    sub.add_option("--ammo", f.ammo, "bomber:u=<p> | fighter | piecewise:knots=y:v,...")->required();
    sub.add_option("--grid", f.grid, "XxT:NXxNT, e.g. 10x10:201x201")->required();
    sub.add_option("--tol", f.tol, "sup-norm stopping threshold");
    sub.add_option("--max-iter", f.max_iter, "iteration cap");
    sub.add_option("--init", f.init, "zero | bound | sandwich");
    sub.add_option("--seed", f.seed, "random seed");
    sub.add_option("--out", f.out, "output directory");
    sub.add_option("--max-nodes", f.max_nodes, "refuse grids with more nodes than this");
}

inline RunConfig resolve(const RawFlags& f) {
    RunConfig c;
    c.model = parse_model(f.model);
    c.ammo = parse_ammo(f.ammo);
    c.grid = parse_grid(f.grid);
    if (c.grid.size() > f.max_nodes) throw UsageError("grid exceeds --max-nodes");
    if (!(f.tol > 0.0)) throw UsageError("--tol must be positive");
    if (f.max_iter < 1) throw UsageError("--max-iter must be at least 1");
    c.solve.tol = f.tol;
    c.solve.max_iter = f.max_iter;
    if (f.init == "zero") {
        c.solve.init = Init::Zero;
    } else if (f.init == "bound") {
        c.solve.init = Init::Bound;
    } else if (f.init == "sandwich") {
        c.solve.init = Init::Sandwich;
    } else {
        throw UsageError("unknown --init '" + f.init + "'");
    }
    c.seed = f.seed;
    c.out_dir = f.out;
    return c;
}

inline std::filesystem::path prepare_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    writer(os);
    os.flush();
    if (!os) throw IoError("write failed for " + path.string());
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
    write_file(path, [&j](std::ostream& os) { os << j.dump(2) << '\n'; });
}

inline Json envelope(const std::string& command, const RunConfig& c) {
    return Json{{"command", command}, {"version", kVersion}, {"config", to_json(c)}};
}

inline Solution solve_config(const RunConfig& c) { return solve(c.model, *c.ammo, c.grid, c.solve); }

inline double fighter_u(const ModelKind& k) { return k.fighter_u(); }

}  // namespace detail

inline int cmd_solve(const RunConfig& c, const std::string& scaling, bool with_policy, std::ostream& out) {
    const auto dir = detail::prepare_dir(c.out_dir);
    const auto sol = detail::solve_config(c);
    const auto raw = rescale(sol.field, Scaling::Raw);

    if (scaling == "raw" || scaling == "both") {
        detail::write_file(dir / "value_raw.csv", [&raw](std::ostream& os) { write_csv(os, raw); });
    }
    if (scaling == "rescaled" || scaling == "both") {
        detail::write_file(dir / "value_rescaled.csv", [&sol](std::ostream& os) { write_csv(os, sol.field); });
    }
    if (with_policy) {
        const auto pol = extract_policy(c.model, *c.ammo, raw);
        detail::write_file(dir / "policy.csv", [&pol](std::ostream& os) { write_csv(os, pol); });
    }
    Json j = detail::envelope("solve", c);
    j["report"] = to_json(sol.report);
    detail::write_json(dir / "solve_report.json", j);

    out << "solve: " << (sol.report.converged ? "converged" : "NOT converged") << " after "
        << sol.report.iterations << " iterations";
    if (sol.report.sandwich_gap) out << ", sandwich gap " << *sol.report.sandwich_gap;
    out << '\n';
    return sol.report.converged ? kOk : kFailure;
}

inline int cmd_check(const RunConfig& c, int property_trials, std::ostream& out) {
    const auto dir = detail::prepare_dir(c.out_dir);
    const auto sol = detail::solve_config(c);
    const auto raw = rescale(sol.field, Scaling::Raw);
    const auto pol = extract_policy(c.model, *c.ammo, raw);

    Json checks = Json::array();
    bool ok = sol.report.converged;
    auto add = [&](Json item, bool asserted) {
        item["asserted"] = asserted;
        if (asserted && !item["holds"].get<bool>()) ok = false;
        out << "  " << (item.contains("check") ? item["check"].get<std::string>()
                                               : "conjecture " + item["conjecture"].get<std::string>())
            << ": " << (item["holds"].get<bool>() ? "pass" : "FAIL") << (asserted ? "" : " (informational)") << '\n';
        checks.push_back(std::move(item));
    };

    out << "check " << to_string(c.model) << " on " << to_string(c.grid) << '\n';
    add(to_json(check_bounds(raw, c.model)), true);
    switch (c.model.which) {
        case ModelKind::Case::Bo:
            add(to_json(check_tp2(sol.field), "tp2_rescaled"), true);
            add(to_json(check_tp2(raw), "tp2_raw"), true);
            add(to_json(check_A(pol)), true);
            add(to_json(check_C(pol)), true);
            add(to_json(check_B(pol)), false);
            break;
        case ModelKind::Case::F0:
            add(to_json(check_tp2(sol.field), "tp2_rescaled"), true);
            add(to_json(check_A(pol)), true);
            add(to_json(check_C(pol)), true);
            break;
        case ModelKind::Case::F1:
            add(to_json(check_concave_in_x(raw), "concave_in_x"), true);
            add(to_json(check_B(pol)), true);
            add(to_json(check_C(pol)), true);
            break;
        case ModelKind::Case::Fu:
            add(to_json(check_A(pol)), false);
            add(to_json(check_B(pol)), false);
            add(to_json(check_C(pol)), false);
            break;
    }
    if (property_trials > 0) add(to_json(property_suite(c.seed, property_trials)), true);

    Json j = detail::envelope("check", c);
    j["solve"] = to_json(sol.report);
    j["checks"] = std::move(checks);
    j["holds"] = ok;
    detail::write_json(dir / "check_report.json", j);
    detail::write_file(dir / "policy.csv", [&pol](std::ostream& os) { write_csv(os, pol); });
    out << (ok ? "all asserted checks pass\n" : "asserted check FAILED\n");
    return ok ? kOk : kFailure;
}

inline int cmd_simulate(const RunConfig& c, double x0, double t0, std::size_t paths, std::ostream& out) {
    bomber::detail::node_index(x0, c.grid.dx(), c.grid.nx, "--x0");
    bomber::detail::node_index(t0, c.grid.dt(), c.grid.nt, "--t0");
    const auto dir = detail::prepare_dir(c.out_dir);
    const auto sol = detail::solve_config(c);
    const auto raw = rescale(sol.field, Scaling::Raw);
    const auto pol = extract_policy(c.model, *c.ammo, raw);
    const SimConfig cfg{paths, c.seed, x0, t0};
    const auto res = c.model.is_bomber() ? simulate_bomber(*c.ammo, pol, cfg)
                                         : simulate_fighter(*c.ammo, detail::fighter_u(c.model), pol, cfg);

    const std::size_t i = static_cast<std::size_t>(std::llround(x0 / c.grid.dx()));
    const std::size_t jt = static_cast<std::size_t>(std::llround(t0 / c.grid.dt()));
    Json j = detail::envelope("simulate", c);
    j["result"] = to_json(res, cfg);
    j["dp_value"] = raw(i, jt);
    j["sandwich_gap_raw"] = sol.report.sandwich_gap ? Json(*sol.report.sandwich_gap * std::exp(-t0)) : Json(nullptr);
    detail::write_json(dir / "simulate_report.json", j);
    out << "simulate: estimate " << res.estimate << " +- " << res.std_err << " (DP " << raw(i, jt) << ")\n";
    return kOk;
}

/// Iterates of the fixed-point map started at zero: log Q_m along t = t_line
/// for m = 1..lines, full surfaces for m = 1..surfaces, and per-iterate
/// sup-distance and log-concavity-in-x verdicts.
inline int cmd_trace(const RunConfig& c, int lines, int surfaces, std::optional<double> t_line, std::ostream& out) {
    if (lines < 1 || surfaces < 0) throw UsageError("--iterates must be >= 1 and --surfaces >= 0");
    const auto dir = detail::prepare_dir(c.out_dir);
    const GridSpec& g = c.grid;
    const double tl = t_line.value_or(g.t_max);
    const std::size_t jl = bomber::detail::node_index(tl, g.dt(), g.nt, "--t-line");

    const int count = std::max(lines, surfaces);
    const auto zero = ValueField::filled(g, Scaling::ExpRescaled, 0.0);
    const auto its = iterates(c.model, *c.ammo, zero, count);

    auto log_or_inf = [](double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); };

    detail::write_file(dir / "trace_line.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "m,x,t,log_value\n";
        for (int m = 1; m <= lines; ++m)
            for (std::size_t i = 0; i < g.nx; ++i)
                os << m << ',' << g.x(i) << ',' << g.t(jl) << ',' << log_or_inf(its[m - 1](i, jl)) << '\n';
    });
    detail::write_file(dir / "trace_surface.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "m,x,t,log_value\n";
        for (int m = 1; m <= surfaces; ++m)
            for (std::size_t i = 0; i < g.nx; ++i)
                for (std::size_t j = 0; j < g.nt; ++j)
                    os << m << ',' << g.x(i) << ',' << g.t(j) << ',' << log_or_inf(its[m - 1](i, j)) << '\n';
    });

    Json verdicts = Json::array();
    bool all_pass = true;
    detail::write_file(dir / "trace_iterates.csv", [&](std::ostream& os) {
        os.precision(17);
        os << "m,sup_delta,logconcave_x,worst_second_diff\n";
        for (int m = 1; m <= count; ++m) {
            const auto& cur = its[m - 1];
            const double d = sup_distance(cur, m == 1 ? zero : its[m - 2]);
            const auto lc = check_logconcave_in_x(cur);
            all_pass = all_pass && lc.holds;
            os << m << ',' << d << ',' << (lc.holds ? "pass" : "fail") << ',' << lc.worst << '\n';
            Json v = to_json(lc, "logconcave_in_x");
            v["m"] = m;
            v["sup_delta"] = d;
            verdicts.push_back(std::move(v));
        }
    });

    Json j = detail::envelope("trace", c);
    j["t_line"] = g.t(jl);
    j["lines"] = lines;
    j["surfaces"] = surfaces;
    j["iterates"] = std::move(verdicts);
    j["all_logconcave_in_x"] = all_pass;
    detail::write_json(dir / "trace_report.json", j);
    out << "trace: " << count << " iterates written; log-concave in x for every iterate: "
        << (all_pass ? "yes" : "no") << '\n';
    return kOk;
}

/// Parses argv and runs one subcommand. Exit codes: 0 success, 1 check or
/// convergence failure, 2 usage error, 3 I/O error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Fixed-point solver and property checks for Bomber/Fighter allocation problems", "bomberfp"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    detail::RawFlags solve_f, check_f, sim_f, trace_f;
    std::string scaling = "raw";
    bool with_policy = false;
    int property_trials = 0;
    double x0 = 0.0, t0 = 0.0;
    std::size_t paths = 100000;
    int lines = 10, surfaces = 7;
    std::optional<double> t_line;

    auto* s_solve = app.add_subcommand("solve", "solve the fixed-point equation and write value CSVs");
    detail::add_common(*s_solve, solve_f, true);
    s_solve->add_option("--scaling", scaling, "raw | rescaled | both")
        ->check(CLI::IsMember({"raw", "rescaled", "both"}));
    s_solve->add_flag("--policy", with_policy, "also write policy.csv");

    auto* s_check = app.add_subcommand("check", "run the structural checks appropriate to the model");
    detail::add_common(*s_check, check_f, true);
    s_check->add_option("--property-trials", property_trials, "also run the randomized preservation suite");

    auto* s_sim = app.add_subcommand("simulate", "Monte-Carlo rollout of the grid-optimal policy");
    detail::add_common(*s_sim, sim_f, true);
    s_sim->add_option("--x0", x0, "starting stock (grid node)")->required();
    s_sim->add_option("--t0", t0, "remaining horizon (grid node)")->required();
    s_sim->add_option("--paths", paths, "number of simulated paths");

    auto* s_trace = app.add_subcommand("trace", "export iterates log Q_m started from zero");
    detail::add_common(*s_trace, trace_f, true);
    s_trace->add_option("--iterates", lines, "number of iterates along the fixed-t line");
    s_trace->add_option("--surfaces", surfaces, "number of full iterate surfaces");
    s_trace->add_option("--t-line", t_line, "t of the line export (default t_max)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*s_solve) return cmd_solve(detail::resolve(solve_f), scaling, with_policy, out);
        if (*s_check) return cmd_check(detail::resolve(check_f), property_trials, out);
        if (*s_sim) {
            if (paths < 1) throw UsageError("--paths must be at least 1");
            return cmd_simulate(detail::resolve(sim_f), x0, t0, paths, out);
        }
        if (*s_trace) return cmd_trace(detail::resolve(trace_f), lines, surfaces, t_line, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const ConsistencyError& e) {
        err << "internal consistency error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}

}  // namespace bomber::cli
