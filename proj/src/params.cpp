#include "patchproc/params.hpp"

#include <array>
#include <cmath>
#include <set>
#include <span>

#include "patchproc/error.hpp"

namespace patchproc {

namespace {

void require_positive(double value, std::string_view key)
{
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw ValidationError("parameter '" + std::string(key) + "' must be a positive finite number");
    }
}

constexpr std::array kOnePatchKeys = {"beta", "mu", "alpha", "delta", "omega"};
constexpr std::array kSaturatingKeys = {"m1", "m2", "a1", "a2"};
constexpr std::array kTwoPatchKeys = {"beta1", "mu1", "beta2", "mu2", "alpha", "delta", "omega", "k"};

template <std::size_t N>
void check_keys(const nlohmann::json& j, const std::array<const char*, N>& keys,
                std::span<const char* const> extra, std::string_view family)
{
    if (!j.is_object()) {
        throw ValidationError("'params' must be a JSON object");
    }
    std::set<std::string> allowed(keys.begin(), keys.end());
    allowed.insert(extra.begin(), extra.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw ValidationError("unknown parameter '" + key + "' for family " + std::string(family));
        }
        if (!value.is_number()) {
            throw ValidationError("parameter '" + key + "' must be a number");
        }
    }
    for (const auto& key : allowed) {
        if (!j.contains(key)) {
            throw ValidationError("missing parameter '" + key + "' for family " + std::string(family));
        }
    }
}

}  // namespace

void ParamSet1P::validate() const
{
    require_positive(beta, "beta");
    require_positive(mu, "mu");
    require_positive(alpha, "alpha");
    require_positive(delta, "delta");
    require_positive(omega, "omega");
    if (const auto* s = std::get_if<Saturating>(&foi)) {
        require_positive(s->m1, "m1");
        require_positive(s->m2, "m2");
        require_positive(s->a1, "a1");
        require_positive(s->a2, "a2");
    }
}

void ParamSet2P::validate() const
{
    require_positive(beta1, "beta1");
    require_positive(mu1, "mu1");
    require_positive(beta2, "beta2");
    require_positive(mu2, "mu2");
    require_positive(alpha, "alpha");
    require_positive(delta, "delta");
    require_positive(omega, "omega");
    require_positive(k, "k");
}

std::string_view family_name(Family f)
{
    switch (f) {
    case Family::OnePatchMassAction:
        return "one_patch_ma";
    case Family::OnePatchSaturating:
        return "one_patch_sat";
    case Family::TwoPatch:
        return "two_patch";
    case Family::Custom:
        return "custom";
    }
    return "custom";
}

Family parse_family(std::string_view name)
{
    if (name == "one_patch_ma") return Family::OnePatchMassAction;
    if (name == "one_patch_sat") return Family::OnePatchSaturating;
    if (name == "two_patch") return Family::TwoPatch;
    throw ValidationError("unknown family '" + std::string(name) +
                          "' (expected one_patch_ma, one_patch_sat or two_patch)");
}

Family family_of(const ParamSet& p)
{
    if (const auto* one = std::get_if<ParamSet1P>(&p)) {
        return one->saturating() ? Family::OnePatchSaturating : Family::OnePatchMassAction;
    }
    return Family::TwoPatch;
}

nlohmann::json params_to_json(const ParamSet& p)
{
    nlohmann::json j = nlohmann::json::object();
    if (const auto* one = std::get_if<ParamSet1P>(&p)) {
        j["beta"] = one->beta;
        j["mu"] = one->mu;
        j["alpha"] = one->alpha;
        j["delta"] = one->delta;
        j["omega"] = one->omega;
        if (const auto* s = std::get_if<Saturating>(&one->foi)) {
            j["m1"] = s->m1;
            j["m2"] = s->m2;
            j["a1"] = s->a1;
            j["a2"] = s->a2;
        }
        return j;
    }
    const auto& two = std::get<ParamSet2P>(p);
    j["beta1"] = two.beta1;
    j["mu1"] = two.mu1;
    j["beta2"] = two.beta2;
    j["mu2"] = two.mu2;
    j["alpha"] = two.alpha;
    j["delta"] = two.delta;
    j["omega"] = two.omega;
    j["k"] = two.k;
    return j;
}

ParamSet params_from_json(Family family, const nlohmann::json& j)
{
    const auto name = family_name(family);
    switch (family) {
    case Family::OnePatchMassAction:
    case Family::OnePatchSaturating: {
        const bool sat = family == Family::OnePatchSaturating;
        if (sat) {
            check_keys(j, kOnePatchKeys, kSaturatingKeys, name);
        } else {
            check_keys(j, kOnePatchKeys, {}, name);
        }
        ParamSet1P p;
        p.beta = j.at("beta").get<double>();
        p.mu = j.at("mu").get<double>();
        p.alpha = j.at("alpha").get<double>();
        p.delta = j.at("delta").get<double>();
        p.omega = j.at("omega").get<double>();
        if (sat) {
            p.foi = Saturating{j.at("m1").get<double>(), j.at("m2").get<double>(), j.at("a1").get<double>(),
                               j.at("a2").get<double>()};
        }
        p.validate();
        return p;
    }
    case Family::TwoPatch: {
        check_keys(j, kTwoPatchKeys, {}, name);
        ParamSet2P p;
        p.beta1 = j.at("beta1").get<double>();
        p.mu1 = j.at("mu1").get<double>();
        p.beta2 = j.at("beta2").get<double>();
        p.mu2 = j.at("mu2").get<double>();
        p.alpha = j.at("alpha").get<double>();
        p.delta = j.at("delta").get<double>();
        p.omega = j.at("omega").get<double>();
        p.k = j.at("k").get<double>();
        p.validate();
        return p;
    }
    case Family::Custom:
        break;
    }
    throw ValidationError("family 'custom' has no parameter schema");
}

}  // namespace patchproc
