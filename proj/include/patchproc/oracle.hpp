#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "patchproc/model.hpp"

namespace patchproc {

/// Exact extinction probability of a capped chain, as a bracket.
///
/// Transient states are those inside the cap box with 0 < infectious total < outbreak threshold.
/// The disease-free set is absorbing with value 1 and the outbreak set with value 0. A transition
/// that would leave the box lands on the cap boundary, valued 0 for `lower` and 1 for `upper`,
/// so the pair brackets the uncapped probability.
struct OracleBracket {
    double lower = 0.0;
    double upper = 1.0;
    std::int64_t states = 0;

    double width() const { return upper - lower; }
    double midpoint() const { return 0.5 * (lower + upper); }
};

inline constexpr std::int64_t kOracleMaxStates = 1'000'000;

/// Throws ValidationError when the transient state space exceeds kOracleMaxStates or `init` lies
/// outside the box, and NumericalError when the linear system is singular.
OracleBracket truncated_oracle(const ModelSpec& model, const StateVec& init, const std::vector<std::int64_t>& caps,
                               std::optional<std::int64_t> outbreak_threshold);

/// Caps that leave the susceptible classes room for ten standard deviations above their DFE level
/// and bound the infectious classes by the threshold.
std::vector<std::int64_t> default_caps(const ModelSpec& model, std::int64_t outbreak_threshold);

}  // namespace patchproc
