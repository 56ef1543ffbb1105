#pragma once

#include "invitesim/ctmc.hpp"
#include "invitesim/fluid.hpp"
#include "invitesim/params.hpp"
#include "invitesim/spectral.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace invitesim {

/// A 2-D path evaluable on [t_begin, t_end].
struct Curve {
    double t_begin = 0.0;
    double t_end = 0.0;
    std::function<Vec2(double)> eval;
};

[[nodiscard]] Curve as_curve(const ScaledTrajectory& traj);
[[nodiscard]] Curve as_curve(const FluidTrajectory& traj);
[[nodiscard]] Curve as_curve(const TVFluidTrajectory& traj);

struct TimeGrid {
    double t0 = 0.0;
    double t1 = 0.0;
    double dt = 0.05;

    [[nodiscard]] std::vector<double> points() const;
};

struct DeviationReport {
    double sup = 0.0;
    double t_at_sup = 0.0;
    TimeGrid grid;
    double sup_y = 0.0;
    double sup_x = 0.0;
};

/// Max over grid points of the max-norm of a(t) - b(t).
[[nodiscard]] DeviationReport sup_deviation(const Curve& a, const Curve& b, const TimeGrid& grid);

/// Piecewise-constant series: value[i] holds on [t[i], t[i+1]) and the last one until t_end.
struct TimeSeries {
    std::vector<double> t;
    std::vector<Vec2> value;
    double t_end = 0.0;
};

[[nodiscard]] TimeSeries to_series(const ScaledTrajectory& traj);

struct StationaryEstimate {
    Vec2 mean = Vec2::Zero();
    Mat2 cov = Mat2::Zero();
    /// Skewness and excess kurtosis of the first component.
    double skew_y = 0.0;
    double excess_kurtosis_y = 0.0;
    std::size_t batches = 0;
    double batch_length = 0.0;
    double burn_in = 0.0;
    /// 95% half-widths from the spread of per-batch estimates (Student t, batches - 1 dof).
    Vec2 mean_half_width = Vec2::Zero();
    Mat2 cov_half_width = Mat2::Zero();
    double skew_half_width = 0.0;
    double kurtosis_half_width = 0.0;
};

/// Time-weighted batch means over [burn_in, t_end] split into n_batches equal windows.
[[nodiscard]] StationaryEstimate batch_means(const TimeSeries& series, double burn_in, std::size_t n_batches);

/// Diffusion-scales a constant-rate run and applies batch_means.
[[nodiscard]] StationaryEstimate stationary_moments(const Trajectory& traj, double burn_in,
                                                    std::size_t n_batches = 20);

struct GaussianTolerances {
    double cov_rel = 0.10;
    /// Mean passes if |mean| <= mean_abs + half-width.
    double mean_abs = 0.1;
    double skew = 0.1;
    double excess_kurtosis = 0.2;
    /// Widen the covariance band by the CI half-width as well.
    bool cov_ci_widening = false;
};

struct GaussianEntry {
    std::string name;
    double estimate;
    double reference;
    double half_width;
    double z_score;
    double tolerance;
    bool pass;
};

struct GaussianReport {
    std::vector<GaussianEntry> entries;
    bool pass = false;
    double scale_r = 0.0;
    /// Set for small r, where finite-scale bias is expected.
    bool pre_asymptotic = false;
};

[[nodiscard]] GaussianReport gaussian_check(const StationaryEstimate& est, const ModelParams& params,
                                            const GaussianTolerances& tol = {});

struct SweepRow {
    double r;
    double mean_dev;
    double std_dev;  ///< NaN with fewer than two replications
    std::size_t n;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool monotone_decreasing = false;
    /// Least-squares slope of log(mean_dev) against log(r).
    double loglog_slope = 0.0;
};

struct SweepOptions {
    double horizon = 50.0;
    std::size_t replications = 20;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    double sample_dt = 0.01;
    double grid_dt = 0.05;
};

/// Mean sup deviation of fluid-scaled Scheme B runs from the fluid model, per r.
/// Initial states are fluid-scale (centered); replication k uses the same stream index for every r.
[[nodiscard]] SweepResult scale_sweep(const std::vector<double>& r_list, const std::vector<FluidState>& initials,
                                      const ModelParams& base, const SweepOptions& opt);

/// CTMC state whose centered fluid scaling is closest to `fluid`.
[[nodiscard]] SystemState ctmc_initial_from_fluid(const FluidState& fluid, const ModelParams& params);

[[nodiscard]] nlohmann::json to_json(const DeviationReport& rep);
[[nodiscard]] nlohmann::json to_json(const StationaryEstimate& est);
[[nodiscard]] nlohmann::json to_json(const GaussianReport& rep);
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

}  // namespace invitesim
