#include "patchproc/reproduction.hpp"

#include <cmath>

namespace patchproc {

double r0(const ParamSet1P& p)
{
    p.validate();
    const double s_bar = p.beta / p.mu;
    if (const auto* sat = std::get_if<Saturating>(&p.foi)) {
        return (sat->m1 * sat->a2 + (p.delta / p.omega) * sat->m2 * sat->a1) / (p.alpha * sat->a1 * sat->a2) * s_bar;
    }
    return (p.delta + p.omega) * p.beta / (p.alpha * p.omega * p.mu);
}

PatchR0 patch_r0(const ParamSet2P& p)
{
    p.validate();
    const double w = p.omega, k = p.k;
    const double num = w * (2 * k + w) + p.delta * (k + w);
    const double den = p.alpha * w * (2 * k + w);
    return {num * p.beta1 / (den * p.mu1), num * p.beta2 / (den * p.mu2)};
}

double r0(const ParamSet2P& p)
{
    const auto [r1, r2] = patch_r0(p);
    const double c = p.delta * p.k / (p.alpha * p.omega * (2 * p.k + p.omega));
    const double s1 = p.beta1 / p.mu1;
    const double s2 = p.beta2 / p.mu2;
    return 0.5 * (r1 + r2 + std::sqrt((r1 - r2) * (r1 - r2) + 4.0 * s1 * s2 * c * c));
}

double r0(const ParamSet& p)
{
    return std::visit([](const auto& q) { return r0(q); }, p);
}

RealVec dfe(const ParamSet1P& p)
{
    p.validate();
    return {p.beta / p.mu, 0.0, 0.0};
}

RealVec dfe(const ParamSet2P& p)
{
    p.validate();
    return {p.beta1 / p.mu1, 0.0, 0.0, p.beta2 / p.mu2, 0.0, 0.0};
}

RealVec dfe(const ParamSet& p)
{
    return std::visit([](const auto& q) { return dfe(q); }, p);
}

}  // namespace patchproc
