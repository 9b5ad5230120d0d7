#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "patchproc/model.hpp"
#include "patchproc/params.hpp"

namespace patchproc {

inline constexpr int kSchemaVersion = 1;

/// Parsed run configuration. Every field is validated against the family before any computation.
///
///   {"schema": 1, "family": "one_patch_ma", "params": {...}, "init": [80, 1, 0],
///    "stop": {"outbreak_threshold": "quasi_steady", "max_events": 10000000, "max_time": 10000},
///    "n": 1000000, "seed": 1, "threads": 0, "options": {...}}
struct RunConfig {
    std::optional<Family> family;
    std::optional<ParamSet> params;
    std::optional<StateVec> init;
    std::optional<std::int64_t> outbreak_threshold;  ///< unset means quasi-steady
    std::int64_t max_events = 10'000'000;
    double max_time = 1e4;
    std::int64_t n = 1'000'000;
    std::uint64_t seed = 20190611;
    unsigned threads = 0;
    nlohmann::json options = nlohmann::json::object();

    /// Model for the configured family; throws ValidationError naming `params` when absent.
    ModelSpec model() const;
    /// Configured initial state, or the DFE with one individual in the first infectious class.
    StateVec initial_state(const ModelSpec& model) const;
};

/// Command-specific option keys accepted under "options".
const std::vector<std::string>& known_option_keys();

RunConfig parse_config(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& c);

/// Applies a `--key value` override. The key is looked up among the top-level scalars, then the
/// params, the stop rule and the options, in that order. `value` is parsed as JSON when possible
/// and taken as a string otherwise. Throws ValidationError for a key that matches nothing.
void apply_override(nlohmann::json& config, const std::string& key, const std::string& value);

}  // namespace patchproc
