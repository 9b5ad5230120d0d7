#include "patchproc/ode.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "patchproc/error.hpp"

namespace patchproc {

void vector_field(const ModelSpec& model, std::span<const double> y, std::span<double> dydt)
{
    std::fill(dydt.begin(), dydt.end(), 0.0);
    for (const auto& r : model.reactions()) {
        const double a = r.rate_at(y);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < dydt.size(); ++j) {
            if (r.stoichiometry[j] != 0) dydt[j] += r.stoichiometry[j] * a;
        }
    }
}

RealVec vector_field(const ModelSpec& model, std::span<const double> y)
{
    RealVec out(y.size());
    vector_field(model, y, out);
    return out;
}

Trajectory integrate(const ModelSpec& model, std::span<const double> y0, double t_end, double rel_tol,
                     double abs_tol)
{
    OdeOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = abs_tol;
    return integrate(model, y0, t_end, opts);
}

Trajectory integrate(const ModelSpec& model, std::span<const double> y0, double t_end, const OdeOptions& opts)
{
    namespace odeint = boost::numeric::odeint;
    model.check_state(y0);
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ValidationError("t_end must be positive");
    }
    for (double tol : {opts.rel_tol, opts.abs_tol}) {
        if (!(tol > 0.0 && tol <= 1e-2)) throw ValidationError("ODE tolerances must lie in (0, 1e-2]");
    }

    using State = std::vector<double>;
    double last_t = 0.0;
    auto rhs = [&](const State& y, State& dydt, double t) {
        last_t = t;
        vector_field(model, y, dydt);
    };

    const std::size_t intervals = std::max<std::size_t>(opts.samples, 200);
    const double dt = t_end / static_cast<double>(intervals);

    Trajectory traj;
    traj.times.reserve(intervals + 1);
    traj.states.reserve(intervals + 1);
    auto observer = [&](const State& y, double t) {
        if (!traj.times.empty() && t <= traj.times.back()) return;
        traj.times.push_back(t);
        traj.states.push_back(y);
    };

    State y(y0.begin(), y0.end());
    auto stepper = odeint::make_dense_output(opts.abs_tol, opts.rel_tol, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_n_steps(stepper, rhs, y, 0.0, dt, intervals, observer);
    } catch (const odeint::odeint_error& e) {
        std::ostringstream msg;
        msg << "ODE integration failed at t=" << last_t << ": " << e.what();
        throw IntegrationError(msg.str(), last_t);
    }
    if (traj.times.size() < 2 || std::abs(traj.times.back() - t_end) > 1e-9 * t_end) {
        throw IntegrationError("ODE integration did not reach t_end", last_t);
    }
    traj.times.back() = t_end;
    return traj;
}

void write_trajectory_csv(std::ostream& os, const ModelSpec& model, const Trajectory& traj)
{
    os << "t";
    for (const auto& name : model.state_names()) os << ',' << name;
    os << '\n';
    const auto old_precision = os.precision(std::numeric_limits<double>::max_digits10);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        os << traj.times[k];
        for (double v : traj.states[k]) os << ',' << v;
        os << '\n';
    }
    os.precision(old_precision);
}

}  // namespace patchproc
