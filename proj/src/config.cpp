#include "patchproc/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "patchproc/error.hpp"
#include "patchproc/reproduction.hpp"

namespace patchproc {

namespace {

const std::set<std::string> kTopKeys = {"schema", "family", "params", "init", "stop", "n", "seed", "threads", "options"};
const std::set<std::string> kStopKeys = {"outbreak_threshold", "max_events", "max_time"};
const std::set<std::string> kParamNames = {"beta", "mu",    "alpha", "delta", "omega", "m1", "m2",
                                           "a1",   "a2",    "beta1", "mu1",   "beta2", "mu2", "k"};

std::int64_t get_int(const nlohmann::json& j, const std::string& key)
{
    if (!j.is_number_integer() && !(j.is_number_float() && j.get<double>() == std::floor(j.get<double>()))) {
        throw ValidationError("'" + key + "' must be an integer");
    }
    return j.get<std::int64_t>();
}

}  // namespace

const std::vector<std::string>& known_option_keys()
{
    static const std::vector<std::string> keys = {"t_end", "rel_tol", "abs_tol",  "samples", "method",
                                                  "tol",   "max_iter", "caps",    "betas",   "sweep",
                                                  "with_oracle", "log",  "stream"};
    return keys;
}

ModelSpec RunConfig::model() const
{
    if (!params) throw ValidationError("config key 'params' is required for this command");
    return build_model(*params);
}

StateVec RunConfig::initial_state(const ModelSpec& m) const
{
    if (init) {
        m.check_state(*init);
        return *init;
    }
    StateVec x(m.dim(), 0);
    if (m.params()) {
        const auto base = dfe(*m.params());
        for (std::size_t j = 0; j < m.dim(); ++j) x[j] = static_cast<std::int64_t>(std::llround(base[j]));
    }
    x[m.infectious_idx().front()] = 1;
    return x;
}

RunConfig parse_config(const nlohmann::json& j)
{
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!kTopKeys.contains(key)) throw ValidationError("unknown config key '" + key + "'");
    }
    RunConfig c;
    if (j.contains("schema") && (!j["schema"].is_number_integer() || j["schema"].get<int>() != kSchemaVersion)) {
        throw ValidationError("'schema' must be " + std::to_string(kSchemaVersion));
    }
    if (j.contains("family")) {
        if (!j["family"].is_string()) throw ValidationError("'family' must be a string");
        c.family = parse_family(j["family"].get<std::string>());
    }
    if (j.contains("params")) {
        if (!c.family) throw ValidationError("'params' given without 'family'");
        c.params = params_from_json(*c.family, j["params"]);
    }
    if (j.contains("init")) {
        if (!c.params) throw ValidationError("'init' given without 'family' and 'params'");
        const auto& init = j["init"];
        if (!init.is_array()) throw ValidationError("'init' must be an array of nonnegative integers");
        StateVec x;
        for (const auto& v : init) x.push_back(get_int(v, "init"));
        const auto m = build_model(*c.params);
        if (x.size() != m.dim()) {
            throw ValidationError("'init' has " + std::to_string(x.size()) + " entries; family " +
                                  std::string(family_name(*c.family)) + " needs " + std::to_string(m.dim()));
        }
        m.check_state(x);
        c.init = std::move(x);
    }
    if (j.contains("stop")) {
        const auto& s = j["stop"];
        if (!s.is_object()) throw ValidationError("'stop' must be an object");
        for (const auto& [key, value] : s.items()) {
            if (!kStopKeys.contains(key)) throw ValidationError("unknown key 'stop." + key + "'");
        }
        if (s.contains("outbreak_threshold")) {
            const auto& t = s["outbreak_threshold"];
            if (t.is_string() && t.get<std::string>() == "quasi_steady") {
                c.outbreak_threshold.reset();
            } else {
                c.outbreak_threshold = get_int(t, "stop.outbreak_threshold");
                if (*c.outbreak_threshold < 2) {
                    throw ValidationError("'stop.outbreak_threshold' must be >= 2 or \"quasi_steady\"");
                }
            }
        }
        if (s.contains("max_events")) c.max_events = get_int(s["max_events"], "stop.max_events");
        if (s.contains("max_time")) {
            if (!s["max_time"].is_number()) throw ValidationError("'stop.max_time' must be a number");
            c.max_time = s["max_time"].get<double>();
        }
        if (c.max_events < 1) throw ValidationError("'stop.max_events' must be positive");
        if (!(c.max_time > 0.0)) throw ValidationError("'stop.max_time' must be positive");
    }
    if (j.contains("n")) {
        c.n = get_int(j["n"], "n");
        if (c.n < 1) throw ValidationError("'n' must be at least 1");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ValidationError("'seed' must be a nonnegative 64-bit integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("threads")) {
        const auto t = get_int(j["threads"], "threads");
        if (t < 0) throw ValidationError("'threads' must be nonnegative");
        c.threads = static_cast<unsigned>(t);
    }
    if (j.contains("options")) {
        const auto& o = j["options"];
        if (!o.is_object()) throw ValidationError("'options' must be an object");
        const auto& known = known_option_keys();
        for (const auto& [key, value] : o.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw ValidationError("unknown key 'options." + key + "'");
            }
        }
        c.options = o;
    }
    return c;
}

nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json j;
    j["schema"] = kSchemaVersion;
    if (c.family) j["family"] = family_name(*c.family);
    if (c.params) j["params"] = params_to_json(*c.params);
    if (c.init) j["init"] = *c.init;
    j["stop"] = {{"max_events", c.max_events}, {"max_time", c.max_time}};
    if (c.outbreak_threshold) j["stop"]["outbreak_threshold"] = *c.outbreak_threshold;
    else j["stop"]["outbreak_threshold"] = "quasi_steady";
    j["n"] = c.n;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["options"] = c.options;
    return j;
}

void apply_override(nlohmann::json& config, const std::string& key, const std::string& value)
{
    nlohmann::json v;
    try {
        v = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
        v = value;
    }
    if (kTopKeys.contains(key) && key != "params" && key != "stop" && key != "options") {
        config[key] = v;
    } else if (kParamNames.contains(key)) {
        config["params"][key] = v;
    } else if (kStopKeys.contains(key)) {
        config["stop"][key] = v;
    } else if (const auto& known = known_option_keys(); std::find(known.begin(), known.end(), key) != known.end()) {
        config["options"][key] = v;
    } else {
        throw ValidationError("unknown override '--" + key + "'");
    }
}

}  // namespace patchproc
