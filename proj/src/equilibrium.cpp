#include "patchproc/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "patchproc/error.hpp"
#include "patchproc/ode.hpp"
#include "patchproc/reproduction.hpp"

namespace patchproc {

std::vector<double> field_jacobian(const ModelSpec& model, std::span<const double> y)
{
    const std::size_t n = model.dim();
    std::vector<double> jac(n * n, 0.0);
    std::vector<double> grad(n);
    for (const auto& r : model.reactions()) {
        std::fill(grad.begin(), grad.end(), 0.0);
        accumulate_gradient(r.rate, y, grad);
        for (std::size_t j = 0; j < n; ++j) {
            if (r.stoichiometry[j] == 0) continue;
            for (std::size_t k = 0; k < n; ++k) jac[j * n + k] += r.stoichiometry[j] * grad[k];
        }
    }
    return jac;
}

double field_residual(const ModelSpec& model, std::span<const double> y)
{
    const auto f = vector_field(model, y);
    double m = 0.0;
    for (double v : f) m = std::max(m, std::abs(v));
    return m;
}

namespace {

bool all_positive(std::span<const double> y)
{
    return std::all_of(y.begin(), y.end(), [](double v) { return v > 0.0; });
}

std::optional<RealVec> newton_polish(const ModelSpec& model, RealVec y, double tol)
{
    const auto n = static_cast<Eigen::Index>(model.dim());
    double res = field_residual(model, y);
    for (int iter = 0; iter < 100 && res >= tol; ++iter) {
        const auto jac = field_jacobian(model, y);
        const auto f = vector_field(model, y);
        Eigen::MatrixXd J(n, n);
        Eigen::VectorXd F(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            F(j) = f[j];
            for (Eigen::Index k = 0; k < n; ++k) J(j, k) = jac[j * n + k];
        }
        const Eigen::VectorXd step = J.fullPivLu().solve(-F);
        if (!step.allFinite()) return std::nullopt;

        double lambda = 1.0;
        bool accepted = false;
        RealVec trial(y.size());
        for (int halvings = 0; halvings < 40; ++halvings, lambda *= 0.5) {
            for (Eigen::Index j = 0; j < n; ++j) trial[j] = y[j] + lambda * step(j);
            if (!all_positive(trial)) continue;
            const double trial_res = field_residual(model, trial);
            if (trial_res < res) {
                y = trial;
                res = trial_res;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (res < tol && all_positive(y)) return y;
    return std::nullopt;
}

std::optional<RealVec> one_patch_equilibrium(const ModelSpec& model, const ParamSet1P& p, double tol)
{
    if (r0(p) <= 1.0) return std::nullopt;
    const double ratio = p.delta / p.omega;
    const double c = 1.0 + ratio;

    RealVec e(3);
    if (const auto* sat = std::get_if<Saturating>(&p.foi)) {
        // dI/dt = 0 gives S = alpha/phi(I); dS/dt = 0 then leaves a scalar root in I.
        auto phi = [&](double i) { return sat->m1 / (sat->a1 + c * i) + sat->m2 * ratio / (sat->a2 + c * i); };
        auto g = [&](double i) { return p.beta - p.mu * p.alpha / phi(i) - i * phi(i); };
        double hi = 1.0;
        while (g(hi) > 0.0) {
            hi *= 2.0;
            if (hi > 1e12) return std::nullopt;
        }
        std::uintmax_t max_iter = 200;
        const auto [lo_root, hi_root] = boost::math::tools::toms748_solve(
            g, 0.0, hi, g(0.0), g(hi), boost::math::tools::eps_tolerance<double>(52), max_iter);
        const double i = 0.5 * (lo_root + hi_root);
        e = {p.alpha / phi(i), i, ratio * i};
    } else {
        const double s = p.alpha * p.omega / (p.delta + p.omega);
        const double i = (p.beta - p.mu * s) / c;
        e = {s, i, ratio * i};
    }
    if (!all_positive(e)) return std::nullopt;
    if (field_residual(model, e) < tol) return e;
    return newton_polish(model, e, tol);
}

bool two_patch_conditions_hold(const ParamSet2P& p)
{
    if (r0(p) <= 1.0) return false;
    const auto [r1, r2] = patch_r0(p);
    const double w = p.omega, k = p.k;
    const double q = p.delta * k / (w * (2 * k + w) + p.delta * (k + w));
    return r1 > (p.mu2 / p.mu1) * q * (r2 - 1.0) && r2 > (p.mu1 / p.mu2) * q * (r1 - 1.0);
}

}  // namespace

std::optional<RealVec> settle_and_polish(const ModelSpec& model, std::span<const double> start, double tol)
{
    RealVec y(start.begin(), start.end());
    double horizon = 200.0;
    for (int round = 0; round < 4; ++round, horizon *= 4.0) {
        const auto traj = integrate(model, y, horizon, 1e-10, 1e-12);
        y = traj.final_state();
        for (double& v : y) v = std::max(v, 0.0);
        if (!all_positive(y)) continue;
        if (auto e = newton_polish(model, y, tol)) return e;
    }
    return std::nullopt;
}

std::optional<RealVec> endemic_equilibrium(const ModelSpec& model, double tol)
{
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    if (!model.params()) return std::nullopt;
    const auto& params = *model.params();
    if (const auto* one = std::get_if<ParamSet1P>(&params)) {
        return one_patch_equilibrium(model, *one, tol);
    }
    const auto& two = std::get<ParamSet2P>(params);
    if (!two_patch_conditions_hold(two)) return std::nullopt;
    auto start = dfe(two);
    start[1] = 1.0;
    return settle_and_polish(model, start, tol);
}

std::int64_t quasi_steady_threshold(const ModelSpec& model)
{
    const auto e = endemic_equilibrium(model);
    if (!e) {
        throw NumericalError("no endemic equilibrium (R0 <= 1?); the quasi-steady outbreak threshold is "
                             "undefined, set stop.outbreak_threshold explicitly");
    }
    const double total = model.infectious_total(std::span<const double>(*e));
    // Guard against a total that is an integer up to rounding noise.
    const auto k = static_cast<std::int64_t>(std::ceil(total - 1e-9));
    return std::max<std::int64_t>(k, 2);
}

}  // namespace patchproc
