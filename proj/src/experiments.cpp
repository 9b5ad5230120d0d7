#include "patchproc/experiments.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "patchproc/branching.hpp"
#include "patchproc/equilibrium.hpp"
#include "patchproc/error.hpp"
#include "patchproc/reproduction.hpp"

namespace patchproc {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::ofstream open_csv(const std::filesystem::path& file)
{
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream os(file);
    if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
    os << std::setprecision(10);
    return os;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag)
{
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(master ^ splitmix64(h));
}

StopRule cell_stop_rule(const ModelSpec& model, const ExperimentOptions& opt)
{
    StopRule stop;
    stop.outbreak_threshold = opt.outbreak_threshold ? *opt.outbreak_threshold : quasi_steady_threshold(model);
    stop.max_events = opt.max_events;
    stop.max_time = opt.max_time;
    stop.validate();
    return stop;
}

std::string table_name(TableId id)
{
    switch (id) {
    case TableId::T2:
        return "T2";
    case TableId::T4:
        return "T4";
    case TableId::T3dM:
        return "T3dM";
    case TableId::T5:
        return "T5";
    }
    return "T4";
}

TableId parse_table_id(std::string_view s)
{
    for (auto id : {TableId::T2, TableId::T4, TableId::T3dM, TableId::T5}) {
        if (table_name(id) == s) return id;
    }
    throw ValidationError("unknown table id '" + std::string(s) + "' (expected T2, T4, T3dM or T5)");
}

ParamSet table_params(TableId id)
{
    switch (id) {
    case TableId::T2:
        return ParamSet2P{4.0, 0.05, 2.4, 0.04, 3.3, 1.3, 4.0, 3.0};
    case TableId::T4:
        return ParamSet1P{4.0, 0.05, 3.3, 1.3, 4.0, MassAction{}};
    case TableId::T3dM:
        return ParamSet1P{4.0, 0.05, 3.3, 1.3, 4.0, Saturating{3.0, 2.5, 3.0, 2.0}};
    case TableId::T5:
        break;
    }
    throw ValidationError("table T5 has no single parameter set");
}

std::vector<std::vector<std::int64_t>> table_initial_infectious(TableId id)
{
    switch (id) {
    case TableId::T2:
        return {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    case TableId::T4:
    case TableId::T3dM:
        return {{1, 0}, {0, 1}, {1, 1}};
    case TableId::T5:
        break;
    }
    throw ValidationError("table T5 has no initial-state rows");
}

std::vector<double> table_reference_mc(TableId id)
{
    switch (id) {
    case TableId::T2:
        return {0.0410, 0.0501, 0.0542, 0.0652};
    case TableId::T4:
        return {0.0407, 0.0494, 0.0020};
    case TableId::T3dM:
        return {0.0548, 0.0606, 0.0042};
    case TableId::T5:
        break;
    }
    throw ValidationError("table T5 has no single MC column");
}

TableResult reproduce_table(TableId id, const ExperimentOptions& opt)
{
    if (id == TableId::T5) throw ValidationError("T5 is produced by reproduce_t5");
    TableResult result;
    result.id = id;
    result.params = table_params(id);
    const auto model = build_model(result.params);
    const auto pgf = offspring_pgf_at_dfe(model);
    const auto q = model.family() == Family::TwoPatch ? extinction_iterate(pgf)
                                                       : extinction_closed_form(std::get<ParamSet1P>(result.params));
    result.q = q.q;
    const auto stop = cell_stop_rule(model, opt);
    const auto base = dfe(result.params);
    const auto reference = table_reference_mc(id);
    const auto inits = table_initial_infectious(id);

    for (std::size_t r = 0; r < inits.size(); ++r) {
        TableRow row;
        row.z0 = inits[r];
        row.init.resize(model.dim());
        for (std::size_t j = 0; j < model.dim(); ++j) row.init[j] = static_cast<std::int64_t>(std::llround(base[j]));
        for (std::size_t t = 0; t < row.z0.size(); ++t) row.init[model.infectious_idx()[t]] = row.z0[t];
        row.p0_mtbp = p0(q, row.z0);
        row.reference_mc = reference[r];
        row.outbreak_threshold = stop.outbreak_threshold;
        row.seed = derive_seed(opt.seed, table_name(id) + "/row" + std::to_string(r));
        const auto start = std::chrono::steady_clock::now();
        row.mc = estimate_extinction(model, row.init, stop, opt.n, row.seed, opt.threads);
        row.seconds = seconds_since(start);
        result.rows.push_back(std::move(row));
    }
    return result;
}

ParamSet1P SweepConfig::at(double beta) const
{
    ParamSet1P p{beta, 1.0, alpha, delta, omega, foi};
    p.validate();
    return p;
}

std::vector<SweepConfig> critical_size_configs()
{
    return {
        {"f1_alpha3.3", 3.3, 1.3, 4.0, MassAction{}},
        {"f1_alpha1.5", 1.5, 1.3, 4.0, MassAction{}},
        {"f2_alpha3.3", 3.3, 1.3, 4.0, Saturating{6.0, 7.5, 3.0, 2.0}},
    };
}

std::vector<double> critical_size_betas()
{
    return {10.0, 20.0, 30.0, 40.0, 50.0};
}

std::vector<double> reference_abs_err(std::size_t config_index)
{
    static const std::vector<std::vector<double>> cols = {
        {0.094, 0.021, 0.006, 0.003, 0.001},
        {0.056, 0.009, 0.003, 0.001, 0.000},
        {0.245, 0.025, 0.003, 0.002, 0.001},
    };
    return cols.at(config_index);
}

double reference_value_exponent(std::size_t config_index)
{
    static const std::vector<double> exps = {-1.11, -1.164, -1.439};
    return exps.at(config_index);
}

std::vector<SweepRow> beta_sweep(const SweepConfig& config, const std::vector<double>& betas,
                                 const ExperimentOptions& opt)
{
    std::vector<SweepRow> rows;
    for (double beta : betas) {
        const auto params = config.at(beta);
        SweepRow row;
        row.beta = beta;
        row.s_bar = beta / params.mu;
        if (r0(params) <= 1.0) {
            row.subcritical = true;
            rows.push_back(row);
            continue;
        }
        const auto model = build_one_patch(params);
        row.p0_mtbp = extinction_closed_form(params).q[0];
        const auto stop = cell_stop_rule(model, opt);
        row.outbreak_threshold = stop.outbreak_threshold;
        const StateVec init{static_cast<std::int64_t>(std::llround(row.s_bar)), 1, 0};
        std::ostringstream tag;
        tag << "sweep/" << config.name << "/beta=" << beta;
        row.seed = derive_seed(opt.seed, tag.str());
        const auto start = std::chrono::steady_clock::now();
        const auto est = estimate_extinction(model, init, stop, opt.n, row.seed, opt.threads);
        row.seconds = seconds_since(start);
        row.p0_mc = est.extinct;
        row.censored = est.censored;
        row.abs_err = std::abs(row.p0_mtbp - row.p0_mc.p_hat);
        if (row.p0_mc.p_hat > 0.0) row.rel_err = row.abs_err / row.p0_mc.p_hat;
        if (opt.with_oracle) {
            try {
                row.oracle = truncated_oracle(model, init, default_caps(model, stop.outbreak_threshold),
                                              stop.outbreak_threshold);
            } catch (const ValidationError&) {
                // Too many states for an exact solve; the row keeps MC only.
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

SweepFits fit_sweep(const std::vector<SweepRow>& rows)
{
    std::vector<double> x, value, abs_err, rel_x, rel_err;
    for (const auto& r : rows) {
        if (r.subcritical) continue;
        x.push_back(r.beta);
        value.push_back(r.p0_mc.p_hat);
        abs_err.push_back(r.abs_err);
        if (r.rel_err) {
            rel_x.push_back(r.beta);
            rel_err.push_back(*r.rel_err);
        }
    }
    SweepFits fits;
    fits.value = fit_power_law(x, value);
    fits.abs_err = fit_power_law(x, abs_err);
    try {
        fits.rel_err = fit_power_law(rel_x, rel_err);
    } catch (const ValidationError&) {
    }
    return fits;
}

int count_inversions(const std::vector<double>& values)
{
    int n = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[i - 1]) ++n;
    }
    return n;
}

std::vector<SweepResult> reproduce_t5(const ExperimentOptions& opt)
{
    std::vector<SweepResult> out;
    for (const auto& cfg : critical_size_configs()) {
        SweepResult s;
        s.config = cfg;
        s.rows = beta_sweep(cfg, critical_size_betas(), opt);
        s.fits = fit_sweep(s.rows);
        out.push_back(std::move(s));
    }
    return out;
}

void write_table_csv(const std::filesystem::path& file, const TableResult& t)
{
    auto os = open_csv(file);
    if (t.id == TableId::T2) {
        os << "I1(0),V1(0),I2(0),V2(0)";
    } else {
        os << "I(0),V(0)";
    }
    os << ",P0,P0_mc,std_err,censored\n";
    for (const auto& r : t.rows) {
        for (auto z : r.z0) os << z << ',';
        os << r.p0_mtbp << ',' << r.mc.extinct.p_hat << ',' << r.mc.extinct.std_err << ',' << r.mc.censored << '\n';
    }
}

void write_t5_csv(const std::filesystem::path& file, const std::vector<SweepResult>& sweeps)
{
    auto os = open_csv(file);
    os << "init_pop";
    for (const auto& s : sweeps) os << ',' << s.config.name;
    for (const auto& s : sweeps) os << ",std_err_" << s.config.name;
    for (const auto& s : sweeps) os << ",censored_" << s.config.name;
    os << '\n';
    if (sweeps.empty()) return;
    for (std::size_t i = 0; i < sweeps.front().rows.size(); ++i) {
        os << sweeps.front().rows[i].s_bar;
        for (const auto& s : sweeps) os << ',' << s.rows.at(i).abs_err;
        for (const auto& s : sweeps) os << ',' << s.rows.at(i).p0_mc.std_err;
        for (const auto& s : sweeps) os << ',' << s.rows.at(i).censored;
        os << '\n';
    }
}

void write_sweep_csv(const std::filesystem::path& file, const std::vector<SweepRow>& rows)
{
    auto os = open_csv(file);
    os << "beta,s_bar,subcritical,p0_mtbp,p0_mc,std_err,censored,abs_err,rel_err,threshold,oracle_lower,oracle_upper\n";
    for (const auto& r : rows) {
        os << r.beta << ',' << r.s_bar << ',' << (r.subcritical ? 1 : 0) << ',' << r.p0_mtbp << ',';
        if (r.subcritical) {
            os << ",,,,,";
        } else {
            os << r.p0_mc.p_hat << ',' << r.p0_mc.std_err << ',' << r.censored << ',' << r.abs_err << ',';
            if (r.rel_err) os << *r.rel_err;
            os << ',' << r.outbreak_threshold;
        }
        os << ',';
        if (r.oracle) os << r.oracle->lower << ',' << r.oracle->upper;
        else os << ',';
        os << '\n';
    }
}

nlohmann::json to_json(const ExperimentOptions& opt)
{
    nlohmann::json j{{"n", opt.n},
                     {"seed", opt.seed},
                     {"max_events", opt.max_events},
                     {"max_time", opt.max_time},
                     {"with_oracle", opt.with_oracle}};
    if (opt.outbreak_threshold) j["outbreak_threshold"] = *opt.outbreak_threshold;
    else j["outbreak_threshold"] = "quasi_steady";
    return j;
}

nlohmann::json to_json(const TableResult& t)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"init", r.init},
                        {"z0", r.z0},
                        {"p0_mtbp", r.p0_mtbp},
                        {"mc", to_json(r.mc)},
                        {"reference_mc", r.reference_mc},
                        {"outbreak_threshold", r.outbreak_threshold},
                        {"seed", r.seed},
                        {"seconds", r.seconds}});
    }
    return {{"table", table_name(t.id)},
            {"family", family_name(family_of(t.params))},
            {"params", params_to_json(t.params)},
            {"q", t.q},
            {"rows", rows}};
}

nlohmann::json to_json(const PowerLawFit& f)
{
    return {{"b", f.b}, {"lambda", f.lambda}, {"r_squared", f.r_squared}, {"points", f.points}};
}

nlohmann::json to_json(const SweepRow& r)
{
    nlohmann::json j{{"beta", r.beta}, {"s_bar", r.s_bar}, {"subcritical", r.subcritical}, {"p0_mtbp", r.p0_mtbp}};
    if (r.subcritical) return j;
    j["p0_mc"] = to_json(r.p0_mc);
    j["censored"] = r.censored;
    j["abs_err"] = r.abs_err;
    j["rel_err"] = r.rel_err ? nlohmann::json(*r.rel_err) : nlohmann::json(nullptr);
    j["outbreak_threshold"] = r.outbreak_threshold;
    j["seed"] = r.seed;
    j["seconds"] = r.seconds;
    if (r.oracle) {
        j["oracle"] = {{"lower", r.oracle->lower}, {"upper", r.oracle->upper}, {"states", r.oracle->states}};
    }
    return j;
}

nlohmann::json to_json(const SweepResult& s)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows) rows.push_back(to_json(r));
    nlohmann::json fits{{"value", to_json(s.fits.value)}, {"abs_err", to_json(s.fits.abs_err)}};
    fits["rel_err"] = s.fits.rel_err ? to_json(*s.fits.rel_err) : nlohmann::json(nullptr);
    return {{"config", s.config.name},
            {"params_at_beta10", params_to_json(s.config.at(10.0))},
            {"rows", rows},
            {"fits", fits}};
}

}  // namespace patchproc
