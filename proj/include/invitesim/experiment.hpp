#pragma once

#include "invitesim/ctmc.hpp"
#include "invitesim/params.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace invitesim {

enum class Output {
    Trajectory,        ///< raw CTMC samples (and |X - X_target| for Scheme A)
    Fluid,             ///< fluid model from each initial state
    Overlay,           ///< aligned sim/fluid CSV plus deviation report
    DiffusionMoments,  ///< moment ODE path and V(inf)
    Stationary,        ///< long-run batch-means estimate and Gaussian check
    Sweep,             ///< sup deviation against r
};

std::string_view to_string(Output out) noexcept;

struct ExperimentConfig {
    std::string name = "custom";
    Scheme scheme = Scheme::B;
    ModelParams params;
    ArrivalRate arrival = ArrivalRate::constant(1.0);
    /// Unscaled initial CTMC states (x_target used by Scheme A).
    std::vector<SystemState> initials{SystemState{}};
    double horizon = 50.0;
    std::uint64_t seed = 1;
    double sample_dt = 0.01;
    /// Deviation grid spacing and start time.
    double deviation_dt = 0.05;
    double deviation_from = 0.0;
    std::vector<Output> outputs{Output::Trajectory};
    std::filesystem::path out_dir = "out";
    std::size_t workers = 1;
    bool record_events = false;
    std::size_t event_budget = 1'000'000;
    /// Time-varying fluid step and moment ODE step.
    double fluid_dt = 1e-3;
    double moment_dt = 1e-3;
    double burn_in = 100.0;
    std::size_t batches = 20;
    std::vector<double> r_list{100.0, 300.0, 1000.0};
    std::size_t replications = 20;
};

/// Throws ConfigInvalid on malformed documents or invalid parameters.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config);

struct OutputFile {
    std::string path;  ///< relative to the output directory
    std::string kind;
    std::string checksum;
};

struct RunManifest {
    nlohmann::json config;
    std::string version;
    double wall_seconds = 0.0;
    std::vector<OutputFile> files;
    std::vector<std::string> warnings;
    nlohmann::json summary = nlohmann::json::object();
};

nlohmann::json to_json(const RunManifest& manifest);

/// Executes the requested outputs and writes data files plus manifest.json into config.out_dir.
RunManifest run(const ExperimentConfig& config);

/// fig2a-fig2d, fig3, fig4a, fig4b and the long-run presets.
std::vector<ExperimentConfig> presets();
ExperimentConfig preset(std::string_view name);

struct PathPoint {
    double t;
    double y;
    double x;
};

struct PlotData {
    std::string csv;
    bool resampled = false;
};

/// Aligned columns t,sim_y,sim_x[,fluid_y,fluid_x] on the simulation grid. A fluid path on a
/// different grid is linearly interpolated and `resampled` is set.
PlotData emit_plot_data(const std::vector<PathPoint>& sim, const std::vector<PathPoint>* fluid);

}  // namespace invitesim
