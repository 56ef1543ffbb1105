#pragma once

// Independent numerical reference for the fluid model: adaptive Dormand-Prince
// integration of the piecewise vector field with event location at the
// boundary. Used only to cross-check the closed-form solver.

#include "invitesim/params.hpp"
#include "invitesim/spectral.hpp"

#include <vector>

namespace invitesim::reference {

struct ReferenceResult {
    std::vector<Vec2> states;  ///< one per requested time
    int boundary_entries = 0;
};

/// States of the reflected fluid model at ascending `times`, starting from `initial` at t = 0.
ReferenceResult integrate_fluid(const Vec2& initial, const ModelParams& params, const std::vector<double>& times,
                                double tolerance = 1e-12);

/// Unconstrained linear flow (y, x)' = (y, x) A integrated numerically to time t.
Vec2 integrate_linear(const Vec2& initial, const ModelParams& params, double t, double tolerance = 1e-12);

}  // namespace invitesim::reference
