#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "patchproc/model.hpp"

namespace patchproc {

/// Deterministic right-hand side: sum over reactions of stoichiometry * rate(y).
void vector_field(const ModelSpec& model, std::span<const double> y, std::span<double> dydt);
RealVec vector_field(const ModelSpec& model, std::span<const double> y);

struct Trajectory {
    std::vector<double> times;
    std::vector<RealVec> states;

    const RealVec& final_state() const { return states.back(); }
};

struct OdeOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::size_t samples = 400;  ///< output intervals; at least 200 are always produced
};

/// Adaptive Dormand-Prince 5(4) integration on [0, t_end] with uniformly spaced output.
/// Throws ValidationError on bad inputs and IntegrationError (carrying the failing time) when
/// the step size underflows.
Trajectory integrate(const ModelSpec& model, std::span<const double> y0, double t_end, double rel_tol,
                     double abs_tol);
Trajectory integrate(const ModelSpec& model, std::span<const double> y0, double t_end, const OdeOptions& opts);

/// CSV with header `t,<state names...>`.
void write_trajectory_csv(std::ostream& os, const ModelSpec& model, const Trajectory& traj);

}  // namespace patchproc
