#pragma once

#include "invitesim/params.hpp"
#include "invitesim/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

namespace invitesim {

/// Centered fluid state (y, x) with x >= -lambda / beta.
using FluidState = Vec2;
/// Uncentered time-varying fluid state (y, x) with x >= 0.
using TVFluidState = Vec2;

struct FluidSegment {
    enum class Kind { Interior, Boundary };
    Kind kind = Kind::Interior;
    double start = 0.0;
    double duration = 0.0;
    /// Interior: eigen-coordinates at the segment start.
    Vec2 alpha = Vec2::Zero();
    /// Boundary: y at the segment start (x is pinned at -lambda / beta).
    double y_start = 0.0;

    [[nodiscard]] double end() const noexcept { return start + duration; }
};

/// Piecewise fluid path: at most three segments (interior, boundary, interior).
class FluidTrajectory {
public:
    FluidTrajectory(ModelParams params, SpectralData spec, double horizon)
        : params_(params), spec_(std::move(spec)), horizon_(horizon) {}

    [[nodiscard]] Vec2 state(double t) const;
    [[nodiscard]] const FluidSegment& segment_at(double t) const;
    /// Evaluates the segment's own formula at t (also slightly outside the segment).
    [[nodiscard]] Vec2 segment_state(const FluidSegment& seg, double t) const;
    [[nodiscard]] std::size_t boundary_segments() const noexcept;

    [[nodiscard]] const std::vector<FluidSegment>& segments() const noexcept { return segments_; }
    [[nodiscard]] double horizon() const noexcept { return horizon_; }
    [[nodiscard]] const ModelParams& params() const noexcept { return params_; }
    [[nodiscard]] const SpectralData& spectral() const noexcept { return spec_; }

    void push(FluidSegment seg) { segments_.push_back(seg); }

private:
    ModelParams params_;
    SpectralData spec_;
    double horizon_;
    std::vector<FluidSegment> segments_;
};

/// Closed-form linear flow sum_i alpha_i e^{-nu_i dt} v_i, ignoring the boundary.
[[nodiscard]] FluidState interior_solution(const FluidState& initial, double dt, const SpectralData& spec);

/// First t > 0 at which the unconstrained linear flow from `initial` reaches x = -lambda / beta.
[[nodiscard]] std::optional<double> boundary_hit_time(const FluidState& initial, const ModelParams& params,
                                                      const SpectralData& spec);

/// Fluid model with the reflecting boundary x = -lambda / beta on [0, horizon].
[[nodiscard]] FluidTrajectory solve_fluid(const FluidState& initial, const ModelParams& params, double horizon);

struct TVFluidSample {
    double t;
    double y;
    double x;
    bool on_boundary;
};

struct TVFluidTrajectory {
    std::vector<TVFluidSample> samples;
    double horizon = 0.0;

    /// Linear interpolation between samples.
    [[nodiscard]] Vec2 at(double t) const;
};

/// Time-varying fluid model (uncentered) by fixed-step RK4 with boundary
/// switching; boundary entry and exit times are located inside the step.
/// Steps are cut at every jump of lambda(.).
[[nodiscard]] TVFluidTrajectory solve_fluid_tv(const TVFluidState& initial, const ArrivalRate& arrival,
                                               const ModelParams& params, double horizon, double dt = 1e-3);

struct DriftReport {
    /// min over interior grid points of -(d/dt |u|*) / |u|*; +inf when no point qualifies.
    double min_interior_decay_ratio;
    /// max over boundary grid points of d/dt |u|*; -inf when the path never sits on the boundary.
    double max_boundary_drift;
    std::size_t boundary_segments;
    std::size_t interior_points;
    std::size_t boundary_points;
    double max_norm;
    bool norm_nonincreasing;
};

/// Finite-difference (h = 1e-6) check of the star-norm drift along a solved trajectory.
[[nodiscard]] DriftReport drift_check(const FluidTrajectory& traj, double grid_dt);

/// CSV with header t,y,x,segment_kind on a uniform grid.
void write_fluid_csv(std::ostream& os, const FluidTrajectory& traj, double dt);
void write_fluid_tv_csv(std::ostream& os, const TVFluidTrajectory& traj, std::size_t stride = 1);
[[nodiscard]] nlohmann::json segments_json(const FluidTrajectory& traj);

}  // namespace invitesim
