#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "patchproc/params.hpp"

namespace patchproc {

/// Integer population counts of a CTMC state, ordered as ModelSpec::state_names().
using StateVec = std::vector<std::int64_t>;
/// Real-valued state of the deterministic system. Equilibria are never rounded into a StateVec.
using RealVec = std::vector<double>;

namespace rate {

/// coeff * x[i]
struct Linear {
    double coeff;
    std::size_t i;
};

/// coeff * x[i]^2
struct Quadratic {
    double coeff;
    std::size_t i;
};

/// x[s] * (x[i] + x[v])
struct MassActionIncidence {
    std::size_t s, i, v;
};

/// x[s] * (m1*x[i]/(a1+x[i]+x[v]) + m2*x[v]/(a2+x[i]+x[v])); a1, a2 > 0 so the denominators never vanish.
struct SaturatingIncidence {
    std::size_t s, i, v;
    double m1, m2, a1, a2;
};

}  // namespace rate

using RateLaw = std::variant<rate::Linear, rate::Quadratic, rate::MassActionIncidence, rate::SaturatingIncidence>;

template <typename T>
double evaluate(const RateLaw& law, std::span<const T> x)
{
    struct Visitor {
        std::span<const T> x;
        double operator()(const rate::Linear& r) const { return r.coeff * static_cast<double>(x[r.i]); }
        double operator()(const rate::Quadratic& r) const
        {
            const double xi = static_cast<double>(x[r.i]);
            return r.coeff * xi * xi;
        }
        double operator()(const rate::MassActionIncidence& r) const
        {
            return static_cast<double>(x[r.s]) * (static_cast<double>(x[r.i]) + static_cast<double>(x[r.v]));
        }
        double operator()(const rate::SaturatingIncidence& r) const
        {
            const double i = static_cast<double>(x[r.i]);
            const double v = static_cast<double>(x[r.v]);
            return static_cast<double>(x[r.s]) * (r.m1 * i / (r.a1 + i + v) + r.m2 * v / (r.a2 + i + v));
        }
    };
    return std::visit(Visitor{x}, law);
}

/// Partial derivatives of the rate law, accumulated into `grad` (size of the state).
void accumulate_gradient(const RateLaw& law, std::span<const double> x, std::span<double> grad);

struct Reaction {
    std::string label;
    std::vector<int> stoichiometry;
    RateLaw rate;

    template <typename T>
    double rate_at(std::span<const T> x) const
    {
        return evaluate(rate, x);
    }
};

/// A named region {x : x[j] == 0 for j in zero, and sum of x[j] over positive_total > 0}.
struct Subspace {
    std::string name;
    std::vector<std::size_t> zero;
    std::vector<std::size_t> positive_total;

    bool contains(std::span<const std::int64_t> x) const;
};

/// Immutable reaction network for one model family.
class ModelSpec {
public:
    ModelSpec(Family family, std::vector<std::string> state_names, std::vector<Reaction> reactions,
              std::vector<std::size_t> infectious_idx, std::optional<ParamSet> params = std::nullopt,
              std::vector<Subspace> subspaces = {});

    Family family() const { return family_; }
    std::size_t dim() const { return state_names_.size(); }
    const std::vector<std::string>& state_names() const { return state_names_; }
    const std::vector<Reaction>& reactions() const { return reactions_; }
    const std::vector<std::size_t>& infectious_idx() const { return infectious_idx_; }
    const std::optional<ParamSet>& params() const { return params_; }
    const std::vector<Subspace>& subspaces() const { return subspaces_; }

    const Reaction& reaction(std::string_view label) const;

    template <typename T>
    double infectious_total(std::span<const T> x) const
    {
        double total = 0;
        for (auto i : infectious_idx_) total += static_cast<double>(x[i]);
        return total;
    }

    /// Throws ValidationError unless x has the model's length and is componentwise nonnegative.
    void check_state(std::span<const std::int64_t> x) const;
    void check_state(std::span<const double> x) const;

private:
    Family family_;
    std::vector<std::string> state_names_;
    std::vector<Reaction> reactions_;
    std::vector<std::size_t> infectious_idx_;
    std::optional<ParamSet> params_;
    std::vector<Subspace> subspaces_;
};

/// State order (S, I, V); six reactions.
ModelSpec build_one_patch(const ParamSet1P& params);
/// State order (S1, I1, V1, S2, I2, V2); fourteen reactions including both diffusion directions.
ModelSpec build_two_patch(const ParamSet2P& params);
ModelSpec build_model(const ParamSet& params);

/// Single infectious class that only dies at rate alpha*I. Used to calibrate the simulator.
ModelSpec build_pure_death(double alpha);

}  // namespace patchproc
