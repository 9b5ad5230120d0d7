#include "patchproc/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "patchproc/branching.hpp"
#include "patchproc/config.hpp"
#include "patchproc/equilibrium.hpp"
#include "patchproc/error.hpp"
#include "patchproc/experiments.hpp"
#include "patchproc/ode.hpp"
#include "patchproc/oracle.hpp"
#include "patchproc/powerlaw.hpp"
#include "patchproc/reproduction.hpp"
#include "patchproc/ssa.hpp"

namespace patchproc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n;
    std::optional<unsigned> threads;
    std::optional<std::string> out_dir;
    bool quick = false;
};

json read_json_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read config file '" + path + "'");
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

/// Folds `--key value` and `--key=value` pairs left over by the parser into the raw config.
void apply_extras(json& config, const std::vector<std::string>& extras)
{
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const auto& a = extras[i];
        if (a.rfind("--", 0) != 0) throw ValidationError("unexpected argument '" + a + "'");
        auto key = a.substr(2);
        std::string value;
        if (const auto eq = key.find('='); eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size()) throw ValidationError("override '--" + key + "' has no value");
            value = extras[++i];
        }
        apply_override(config, key, value);
    }
}

template <typename T>
T option_or(const RunConfig& c, const std::string& key, T fallback)
{
    if (!c.options.contains(key)) return fallback;
    try {
        return c.options.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError("'options." + key + "' has the wrong type");
    }
}

ExperimentOptions experiment_options(const RunConfig& c)
{
    ExperimentOptions opt;
    opt.n = c.n;
    opt.seed = c.seed;
    opt.threads = c.threads;
    opt.outbreak_threshold = c.outbreak_threshold;
    opt.max_events = c.max_events;
    opt.max_time = c.max_time;
    opt.with_oracle = option_or(c, "with_oracle", false);
    return opt;
}

StopRule stop_rule(const RunConfig& c, const ModelSpec& model)
{
    return cell_stop_rule(model, experiment_options(c));
}

fs::path output_dir(const Globals& g)
{
    if (g.out_dir) return *g.out_dir;
    if (const char* env = std::getenv("PATCHPROC_OUT"); env && *env) return env;
    return "patchproc_out";
}

void write_json_file(const fs::path& file, const json& j)
{
    fs::create_directories(file.parent_path());
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    os << j.dump(2) << '\n';
}

json manifest(const std::string& command, const json& resolved, const json& result)
{
    return {{"schema", kSchemaVersion}, {"command", command}, {"resolved_config", resolved}, {"result", result}};
}

std::vector<std::pair<double, double>> read_xy_csv(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read csv '" + path + "'");
    std::vector<std::pair<double, double>> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',')) {
            throw ValidationError("csv line " + std::to_string(lineno) + " needs two columns");
        }
        try {
            std::size_t pa = 0, pb = 0;
            const double x = std::stod(a, &pa);
            const double y = std::stod(b, &pb);
            pts.emplace_back(x, y);
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header
            throw ValidationError("csv line " + std::to_string(lineno) + " is not numeric");
        }
    }
    return pts;
}

json run_command(const std::string& command, const RunConfig& c, const json& resolved, const Globals& g,
                 const std::string& positional)
{
    const auto out = output_dir(g);

    if (command == "r0") {
        const auto model = c.model();
        json j{{"family", family_name(model.family())}, {"r0", r0(*c.params)}};
        if (const auto* two = std::get_if<ParamSet2P>(&*c.params)) {
            const auto pr = patch_r0(*two);
            j["patch_r0"] = {pr.patch1, pr.patch2};
        }
        return j;
    }
    if (command == "dfe") {
        const auto model = c.model();
        return {{"state_names", model.state_names()}, {"dfe", dfe(*c.params)}};
    }
    if (command == "endemic") {
        const auto model = c.model();
        const auto eq = endemic_equilibrium(model);
        json j{{"state_names", model.state_names()}, {"exists", eq.has_value()}};
        j["endemic"] = eq ? json(*eq) : json(nullptr);
        if (eq) j["quasi_steady_threshold"] = quasi_steady_threshold(model);
        return j;
    }
    if (command == "ode") {
        const auto model = c.model();
        const auto x0 = c.initial_state(model);
        const RealVec y0(x0.begin(), x0.end());
        OdeOptions opts;
        opts.rel_tol = option_or(c, "rel_tol", opts.rel_tol);
        opts.abs_tol = option_or(c, "abs_tol", opts.abs_tol);
        opts.samples = option_or<std::size_t>(c, "samples", opts.samples);
        const double t_end = option_or(c, "t_end", 100.0);
        const auto traj = integrate(model, y0, t_end, opts);
        const auto file = out / "trajectory.csv";
        fs::create_directories(out);
        std::ofstream os(file);
        if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
        write_trajectory_csv(os, model, traj);
        return {{"file", file.string()}, {"points", traj.times.size()}, {"final_state", traj.final_state()}};
    }
    if (command == "simulate") {
        const auto model = c.model();
        const auto x0 = c.initial_state(model);
        const auto stop = stop_rule(c, model);
        const RngSpec rng{c.seed, option_or<std::uint64_t>(c, "stream", 0)};
        Outcome o;
        json j;
        if (option_or(c, "log", true)) {
            const auto file = out / "realization.csv";
            fs::create_directories(out);
            std::ofstream os(file);
            if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
            RealizationLog log(os, model);
            o = simulate_one(model, x0, stop, rng, &log);
            j["file"] = file.string();
        } else {
            o = simulate_one(model, x0, stop, rng);
        }
        j["outbreak_threshold"] = stop.outbreak_threshold;
        j["outcome"] = to_json(o);
        return j;
    }
    if (command == "extinct") {
        const auto model = c.model();
        const bool one_patch = std::holds_alternative<ParamSet1P>(*c.params);
        const auto method = option_or<std::string>(c, "method", one_patch ? "closed_form" : "iterate");
        ExtinctionVector q;
        if (method == "closed_form") {
            if (!one_patch) throw ValidationError("'options.method' closed_form is only available for one patch");
            q = extinction_closed_form(std::get<ParamSet1P>(*c.params));
        } else if (method == "iterate") {
            q = extinction_iterate(offspring_pgf_at_dfe(model), option_or(c, "tol", 1e-12),
                                   option_or<std::int64_t>(c, "max_iter", 1'000'000));
        } else {
            throw ValidationError("'options.method' must be closed_form or iterate");
        }
        auto j = extinction_report(model, q);
        const auto x0 = c.initial_state(model);
        j["z0"] = infectious_counts(model, x0);
        j["p0"] = p0(q, j["z0"].get<std::vector<std::int64_t>>());
        return j;
    }
    if (command == "mc") {
        const auto model = c.model();
        const auto x0 = c.initial_state(model);
        const auto stop = stop_rule(c, model);
        const auto est = estimate_extinction(model, x0, stop, c.n, c.seed, c.threads);
        auto j = to_json(est);
        j["outbreak_threshold"] = stop.outbreak_threshold;
        write_json_file(out / "mc.json", manifest(command, resolved, j));
        return j;
    }
    if (command == "oracle") {
        const auto model = c.model();
        const auto x0 = c.initial_state(model);
        const auto stop = stop_rule(c, model);
        const auto caps = option_or(c, "caps", default_caps(model, stop.outbreak_threshold));
        const auto b = truncated_oracle(model, x0, caps, stop.outbreak_threshold);
        return {{"lower", b.lower},
                {"upper", b.upper},
                {"width", b.width()},
                {"states", b.states},
                {"caps", caps},
                {"outbreak_threshold", stop.outbreak_threshold}};
    }
    if (command == "table") {
        const auto id = parse_table_id(positional);
        const auto opt = experiment_options(c);
        json result;
        if (id == TableId::T5) {
            const auto sweeps = reproduce_t5(opt);
            write_t5_csv(out / "T5.csv", sweeps);
            result = json::array();
            for (const auto& s : sweeps) result.push_back(to_json(s));
        } else {
            const auto t = reproduce_table(id, opt);
            write_table_csv(out / (table_name(id) + ".csv"), t);
            result = to_json(t);
        }
        write_json_file(out / "manifest.json", manifest(command + " " + table_name(id), resolved, result));
        return {{"file", (out / (table_name(id) + ".csv")).string()}, {"result", result}};
    }
    if (command == "sweep") {
        SweepConfig cfg;
        if (c.options.contains("sweep")) {
            const auto name = option_or<std::string>(c, "sweep", "");
            bool found = false;
            for (const auto& s : critical_size_configs()) {
                if (s.name == name) {
                    cfg = s;
                    found = true;
                }
            }
            if (!found) throw ValidationError("unknown 'options.sweep' '" + name + "'");
        } else if (c.params && std::holds_alternative<ParamSet1P>(*c.params)) {
            const auto& p = std::get<ParamSet1P>(*c.params);
            if (p.mu != 1.0) throw ValidationError("sweep requires 'mu' = 1 so that S-bar equals beta");
            cfg = {std::string(family_name(*c.family)), p.alpha, p.delta, p.omega, p.foi};
        } else {
            cfg = critical_size_configs().front();
        }
        const auto betas = option_or(c, "betas", critical_size_betas());
        const auto rows = beta_sweep(cfg, betas, experiment_options(c));
        write_sweep_csv(out / "sweep.csv", rows);
        SweepResult s{cfg, rows, {}};
        s.fits = fit_sweep(rows);
        const auto result = to_json(s);
        write_json_file(out / "manifest.json", manifest(command, resolved, result));
        return {{"file", (out / "sweep.csv").string()}, {"result", result}};
    }
    if (command == "fit") {
        const auto pts = read_xy_csv(positional);
        std::vector<double> x, y;
        for (const auto& [a, b] : pts) {
            x.push_back(a);
            y.push_back(b);
        }
        return to_json(fit_power_law(x, y));
    }
    throw ValidationError("unknown command '" + command + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Stochastic SIV epidemic models: ODE, CTMC simulation, branching-process extinction"};
    app.name("patchproc");
    app.require_subcommand(1);
    app.allow_extras();
    Globals g;
    app.add_option("--config", g.config_path, "JSON run configuration");
    app.add_option("--seed", g.seed, "Master seed (u64)");
    app.add_option("--n", g.n, "Realizations per Monte Carlo cell");
    app.add_option("--threads", g.threads, "Worker cap; results do not depend on it");
    app.add_option("--out", g.out_dir, "Output directory (default $PATCHPROC_OUT or ./patchproc_out)");
    app.add_flag("--quick", g.quick, "Divide the realization count by 100");

    std::string positional;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"r0", "Basic reproduction number"},
        {"dfe", "Disease-free equilibrium"},
        {"endemic", "Endemic equilibrium and quasi-steady outbreak threshold"},
        {"ode", "Integrate the deterministic model to trajectory.csv"},
        {"simulate", "One Gillespie realization to realization.csv"},
        {"extinct", "Branching-process extinction probabilities"},
        {"mc", "Monte Carlo extinction estimate"},
        {"oracle", "Exact extinction bracket of the capped chain"},
        {"table", "Reproduce a table: T2, T4, T3dM or T5"},
        {"sweep", "Beta sweep at mu = 1 with power-law fits"},
        {"fit", "Power-law fit of a two-column csv"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->allow_extras();
        if (name == "table") sub->add_option("id", positional, "Table id")->required();
        if (name == "fit") sub->add_option("csv", positional, "Input csv (x,y)")->required();
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    const auto* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    try {
        json raw = g.config_path.empty() ? json::object() : read_json_file(g.config_path);
        apply_extras(raw, app.remaining(true));
        if (g.seed) raw["seed"] = *g.seed;
        if (g.n) raw["n"] = *g.n;
        if (g.threads) raw["threads"] = *g.threads;
        auto config = parse_config(raw);
        if (g.quick) config.n = std::max<std::int64_t>(1, config.n / 100);
        const auto resolved = to_json(config);
        const auto result = run_command(command, config, resolved, g, positional);
        json doc{{"resolved_config", resolved}, {"command", command}, {"result", result}};
        out << doc.dump(2) << '\n';
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "patchproc " << command << ": config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "patchproc " << command << ": numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "patchproc " << command << ": " << e.what() << '\n';
        return 1;
    }
}

}  // namespace patchproc
