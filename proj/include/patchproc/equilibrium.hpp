#pragma once

#include <cstdint>
#include <optional>

#include "patchproc/model.hpp"

namespace patchproc {

/// Jacobian of the deterministic vector field, row-major dim x dim.
std::vector<double> field_jacobian(const ModelSpec& model, std::span<const double> y);

/// Sup-norm of the deterministic vector field at y.
double field_residual(const ModelSpec& model, std::span<const double> y);

/// Positive endemic equilibrium, or nullopt when it does not exist (R0 <= 1, or for two patches
/// the symmetric existence conditions fail) or cannot be located to `tol`.
///
/// Single-patch models reduce to a scalar root in I (V = (delta/omega) I, S from dI/dt = 0).
/// The two-patch model is settled with the ODE from the DFE plus one infected in patch 1 and
/// then polished by damped Newton on the vector field.
std::optional<RealVec> endemic_equilibrium(const ModelSpec& model, double tol = 1e-10);

/// ODE settling from `start` followed by damped Newton; shared by every family and usable as an
/// independent route for the single-patch closed forms.
std::optional<RealVec> settle_and_polish(const ModelSpec& model, std::span<const double> start, double tol);

/// Outbreak threshold used to classify realizations: the infectious total of the endemic
/// equilibrium (the chain's quasi-steady state) rounded up, and never below 2.
/// Throws NumericalError when no endemic equilibrium exists.
std::int64_t quasi_steady_threshold(const ModelSpec& model);

}  // namespace patchproc
