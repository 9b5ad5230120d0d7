#include "patchproc/model.hpp"

#include <algorithm>
#include <cmath>

#include "patchproc/error.hpp"

namespace patchproc {

void accumulate_gradient(const RateLaw& law, std::span<const double> x, std::span<double> grad)
{
    struct Visitor {
        std::span<const double> x;
        std::span<double> g;
        void operator()(const rate::Linear& r) const { g[r.i] += r.coeff; }
        void operator()(const rate::Quadratic& r) const { g[r.i] += 2.0 * r.coeff * x[r.i]; }
        void operator()(const rate::MassActionIncidence& r) const
        {
            g[r.s] += x[r.i] + x[r.v];
            g[r.i] += x[r.s];
            g[r.v] += x[r.s];
        }
        void operator()(const rate::SaturatingIncidence& r) const
        {
            const double s = x[r.s], i = x[r.i], v = x[r.v];
            const double d1 = r.a1 + i + v;
            const double d2 = r.a2 + i + v;
            g[r.s] += r.m1 * i / d1 + r.m2 * v / d2;
            // d/di [m1 i/d1] = m1 (a1+v)/d1^2, d/di [m2 v/d2] = -m2 v/d2^2
            g[r.i] += s * (r.m1 * (r.a1 + v) / (d1 * d1) - r.m2 * v / (d2 * d2));
            g[r.v] += s * (-r.m1 * i / (d1 * d1) + r.m2 * (r.a2 + i) / (d2 * d2));
        }
    };
    std::visit(Visitor{x, grad}, law);
}

bool Subspace::contains(std::span<const std::int64_t> x) const
{
    for (auto j : zero) {
        if (x[j] != 0) return false;
    }
    if (positive_total.empty()) return true;
    std::int64_t total = 0;
    for (auto j : positive_total) total += x[j];
    return total > 0;
}

ModelSpec::ModelSpec(Family family, std::vector<std::string> state_names, std::vector<Reaction> reactions,
                     std::vector<std::size_t> infectious_idx, std::optional<ParamSet> params,
                     std::vector<Subspace> subspaces)
    : family_(family),
      state_names_(std::move(state_names)),
      reactions_(std::move(reactions)),
      infectious_idx_(std::move(infectious_idx)),
      params_(std::move(params)),
      subspaces_(std::move(subspaces))
{
    if (infectious_idx_.empty()) {
        throw ValidationError("model must declare at least one infectious class");
    }
    for (auto i : infectious_idx_) {
        if (i >= state_names_.size()) throw ValidationError("infectious index out of range");
    }
    for (const auto& r : reactions_) {
        if (r.stoichiometry.size() != state_names_.size()) {
            throw ValidationError("reaction '" + r.label + "' stoichiometry does not match the state length");
        }
    }
    std::size_t expected = 0;
    switch (family_) {
    case Family::OnePatchMassAction:
    case Family::OnePatchSaturating:
        expected = 6;
        break;
    case Family::TwoPatch:
        expected = 14;
        break;
    case Family::Custom:
        break;
    }
    if (expected != 0 && reactions_.size() != expected) {
        throw ValidationError("family " + std::string(family_name(family_)) + " requires " +
                              std::to_string(expected) + " reactions");
    }
}

const Reaction& ModelSpec::reaction(std::string_view label) const
{
    auto it = std::find_if(reactions_.begin(), reactions_.end(), [&](const Reaction& r) { return r.label == label; });
    if (it == reactions_.end()) {
        throw ValidationError("no reaction labelled '" + std::string(label) + "'");
    }
    return *it;
}

void ModelSpec::check_state(std::span<const std::int64_t> x) const
{
    if (x.size() != dim()) {
        throw ValidationError("state has length " + std::to_string(x.size()) + ", model expects " +
                              std::to_string(dim()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] < 0) throw ValidationError("state component '" + state_names_[j] + "' is negative");
    }
}

void ModelSpec::check_state(std::span<const double> x) const
{
    if (x.size() != dim()) {
        throw ValidationError("state has length " + std::to_string(x.size()) + ", model expects " +
                              std::to_string(dim()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!(x[j] >= 0.0)) throw ValidationError("state component '" + state_names_[j] + "' is negative");
    }
}

namespace {

std::vector<int> unit(std::size_t n, std::initializer_list<std::pair<std::size_t, int>> entries)
{
    std::vector<int> v(n, 0);
    for (auto [i, d] : entries) v[i] = d;
    return v;
}

RateLaw incidence(const ParamSet1P& p, std::size_t s, std::size_t i, std::size_t v)
{
    if (const auto* sat = std::get_if<Saturating>(&p.foi)) {
        return rate::SaturatingIncidence{s, i, v, sat->m1, sat->m2, sat->a1, sat->a2};
    }
    return rate::MassActionIncidence{s, i, v};
}

}  // namespace

ModelSpec build_one_patch(const ParamSet1P& p)
{
    p.validate();
    constexpr std::size_t S = 0, I = 1, V = 2, n = 3;
    std::vector<Reaction> r;
    r.push_back({"Birth of S", unit(n, {{S, +1}}), rate::Linear{p.beta, S}});
    r.push_back({"Death of S", unit(n, {{S, -1}}), rate::Quadratic{p.mu, S}});
    r.push_back({"Infection", unit(n, {{S, -1}, {I, +1}}), incidence(p, S, I, V)});
    r.push_back({"Death of I", unit(n, {{I, -1}}), rate::Linear{p.alpha, I}});
    r.push_back({"Shedding of V", unit(n, {{V, +1}}), rate::Linear{p.delta, I}});
    r.push_back({"Clearance of V", unit(n, {{V, -1}}), rate::Linear{p.omega, V}});
    const auto family = p.saturating() ? Family::OnePatchSaturating : Family::OnePatchMassAction;
    return ModelSpec(family, {"S", "I", "V"}, std::move(r), {I, V}, ParamSet{p});
}

ModelSpec build_two_patch(const ParamSet2P& p)
{
    p.validate();
    constexpr std::size_t S1 = 0, I1 = 1, V1 = 2, S2 = 3, I2 = 4, V2 = 5, n = 6;
    std::vector<Reaction> r;
    r.push_back({"Birth of S1", unit(n, {{S1, +1}}), rate::Linear{p.beta1, S1}});
    r.push_back({"Death of S1", unit(n, {{S1, -1}}), rate::Quadratic{p.mu1, S1}});
    r.push_back({"Infection of S1", unit(n, {{S1, -1}, {I1, +1}}), rate::MassActionIncidence{S1, I1, V1}});
    r.push_back({"Death of I1", unit(n, {{I1, -1}}), rate::Linear{p.alpha, I1}});
    r.push_back({"Shedding of V1", unit(n, {{V1, +1}}), rate::Linear{p.delta, I1}});
    r.push_back({"Clearance of V1", unit(n, {{V1, -1}}), rate::Linear{p.omega, V1}});
    r.push_back({"Diffusion of V1", unit(n, {{V1, -1}, {V2, +1}}), rate::Linear{p.k, V1}});
    r.push_back({"Birth of S2", unit(n, {{S2, +1}}), rate::Linear{p.beta2, S2}});
    r.push_back({"Death of S2", unit(n, {{S2, -1}}), rate::Quadratic{p.mu2, S2}});
    r.push_back({"Infection of S2", unit(n, {{S2, -1}, {I2, +1}}), rate::MassActionIncidence{S2, I2, V2}});
    r.push_back({"Death of I2", unit(n, {{I2, -1}}), rate::Linear{p.alpha, I2}});
    r.push_back({"Shedding of V2", unit(n, {{V2, +1}}), rate::Linear{p.delta, I2}});
    r.push_back({"Clearance of V2", unit(n, {{V2, -1}}), rate::Linear{p.omega, V2}});
    r.push_back({"Diffusion of V2", unit(n, {{V2, -1}, {V1, +1}}), rate::Linear{p.k, V2}});

    // patchN_free includes total extinction; patchN_partial is the strictly partial event.
    std::vector<Subspace> subspaces = {
        {"patch1_free", {I1, V1}, {}},
        {"patch2_free", {I2, V2}, {}},
        {"patch1_partial", {I1, V1}, {I2, V2}},
        {"patch2_partial", {I2, V2}, {I1, V1}},
    };
    return ModelSpec(Family::TwoPatch, {"S1", "I1", "V1", "S2", "I2", "V2"}, std::move(r), {I1, V1, I2, V2},
                     ParamSet{p}, std::move(subspaces));
}

ModelSpec build_model(const ParamSet& params)
{
    if (const auto* one = std::get_if<ParamSet1P>(&params)) return build_one_patch(*one);
    return build_two_patch(std::get<ParamSet2P>(params));
}

ModelSpec build_pure_death(double alpha)
{
    if (!(alpha > 0.0)) throw ValidationError("parameter 'alpha' must be positive");
    std::vector<Reaction> r;
    r.push_back({"Death of I", {-1}, rate::Linear{alpha, 0}});
    return ModelSpec(Family::Custom, {"I"}, std::move(r), {0});
}

}  // namespace patchproc
