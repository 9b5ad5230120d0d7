#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "json.hpp"

namespace patchproc {

/// Force of infection S*(I+V).
struct MassAction {};

/// Force of infection S*(m1*I/(a1+I+V) + m2*V/(a2+I+V)).
struct Saturating {
    double m1 = 0;
    double m2 = 0;
    double a1 = 0;
    double a2 = 0;
};

using ForceOfInfection = std::variant<MassAction, Saturating>;

/// Rates of the single-patch SIV model. Units are 1/time except mu (1/(time*individual)).
struct ParamSet1P {
    double beta = 0;   ///< birth rate of susceptibles
    double mu = 0;     ///< density-dependent mortality
    double alpha = 0;  ///< infected mortality
    double delta = 0;  ///< shedding
    double omega = 0;  ///< environmental clearance
    ForceOfInfection foi = MassAction{};

    bool saturating() const { return std::holds_alternative<Saturating>(foi); }
    void validate() const;
};

/// Rates of the two-patch model coupled by viral diffusion k.
struct ParamSet2P {
    double beta1 = 0;
    double mu1 = 0;
    double beta2 = 0;
    double mu2 = 0;
    double alpha = 0;
    double delta = 0;
    double omega = 0;
    double k = 0;

    void validate() const;
};

using ParamSet = std::variant<ParamSet1P, ParamSet2P>;

enum class Family { OnePatchMassAction, OnePatchSaturating, TwoPatch, Custom };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);
Family family_of(const ParamSet& p);

/// Flat key/value JSON with exactly the field names of the selected family.
nlohmann::json params_to_json(const ParamSet& p);
/// Throws ValidationError naming the offending key on unknown, missing or nonpositive entries.
ParamSet params_from_json(Family family, const nlohmann::json& j);

}  // namespace patchproc
