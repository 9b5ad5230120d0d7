#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "patchproc/model.hpp"
#include "patchproc/rng.hpp"

namespace patchproc {

/// When a realization stops. A realization is Extinct once the infectious total is 0, an
/// Outbreak once it reaches `outbreak_threshold`, and Censored when either budget runs out.
struct StopRule {
    std::int64_t outbreak_threshold = 0;
    std::int64_t max_events = 10'000'000;
    double max_time = 1e4;

    void validate() const;

    /// Threshold at the infectious total of the endemic equilibrium (see quasi_steady_threshold).
    static StopRule quasi_steady(const ModelSpec& model);
};

enum class OutcomeKind { Extinct, Outbreak, Censored };
std::string_view outcome_name(OutcomeKind k);

struct Outcome {
    OutcomeKind kind = OutcomeKind::Censored;
    double t_final = 0.0;
    std::int64_t events_used = 0;
    /// First time each registered subspace was entered; absent if never entered before termination.
    std::map<std::string, double> partial_hits;
    StateVec final_state;
};

/// CSV sink `event_index,t,reaction_label,<state...>`; row 0 is the initial state.
class RealizationLog {
public:
    RealizationLog(std::ostream& os, const ModelSpec& model);
    void record(std::int64_t event_index, double t, std::string_view label, std::span<const std::int64_t> x);

private:
    std::ostream& os_;
};

/// Exact (direct-method) simulation of one realization.
Outcome simulate_one(const ModelSpec& model, const StateVec& init, const StopRule& stop, RngSpec rng,
                     RealizationLog* log = nullptr);

struct McEstimate {
    std::int64_t hits = 0;
    std::int64_t n = 0;
    double p_hat = 0.0;
    double std_err = 0.0;

    static McEstimate from_counts(std::int64_t hits, std::int64_t n);
};

struct SubspaceEstimate {
    std::string name;
    McEstimate estimate;
};

struct ExtinctionEstimate {
    McEstimate extinct;
    std::int64_t outbreaks = 0;
    std::int64_t censored = 0;  ///< counted as non-extinct in `extinct`
    double mean_extinction_time = 0.0;
    double extinction_time_std_err = 0.0;
    std::vector<SubspaceEstimate> subspaces;
};

/// Runs realizations 0..n-1 on streams 0..n-1 of `master_seed`. Results (including the floating
/// point time statistics) are identical for any `threads`; 0 means hardware concurrency.
ExtinctionEstimate estimate_extinction(const ModelSpec& model, const StateVec& init, const StopRule& stop,
                                       std::int64_t n, std::uint64_t master_seed, unsigned threads = 0);

nlohmann::json to_json(const McEstimate& e);
nlohmann::json to_json(const ExtinctionEstimate& e);
nlohmann::json to_json(const Outcome& o);

}  // namespace patchproc
