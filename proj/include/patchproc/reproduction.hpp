#pragma once

#include "patchproc/model.hpp"
#include "patchproc/params.hpp"

namespace patchproc {

/// Basic reproduction number of the single-patch model (mass action or saturating).
double r0(const ParamSet1P& p);
/// Combined two-patch reproduction number; equals the spectral radius of the next-generation matrix.
double r0(const ParamSet2P& p);
double r0(const ParamSet& p);

struct PatchR0 {
    double patch1;
    double patch2;
};

/// Reproduction numbers of each patch in isolation from the other patch's hosts (virus still diffuses).
PatchR0 patch_r0(const ParamSet2P& p);

/// Disease-free equilibrium: S = beta/mu in every patch, all infectious classes zero.
RealVec dfe(const ParamSet1P& p);
RealVec dfe(const ParamSet2P& p);
RealVec dfe(const ParamSet& p);

}  // namespace patchproc
