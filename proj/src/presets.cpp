#include "invitesim/error.hpp"
#include "invitesim/experiment.hpp"

#include <algorithm>

namespace invitesim {

namespace {

SystemState initial(long long y, long long x, double x_target = -1.0) {
    SystemState s;
    s.y = y;
    s.x = x;
    s.x_target = x_target < 0.0 ? static_cast<double>(x) : x_target;
    return s;
}

ExperimentConfig figure_base(std::string name) {
    ExperimentConfig c;
    c.name = std::move(name);
    c.params = ModelParams{};
    c.arrival = ArrivalRate::constant(c.params.lambda);
    c.horizon = 50.0;
    c.outputs = {Output::Trajectory, Output::Fluid, Output::Overlay};
    c.out_dir = c.name;
    return c;
}

ExperimentConfig fig2(std::string name, long long y, long long x) {
    auto c = figure_base(std::move(name));
    c.initials = {initial(y, x)};
    return c;
}

ExperimentConfig fig4(std::string name, long long y, long long x) {
    auto c = figure_base(std::move(name));
    c.arrival = ArrivalRate::sinusoid(1.0, 0.2, 120.0);
    c.initials = {initial(y, x)};
    c.horizon = 500.0;
    c.deviation_from = 5.0;
    return c;
}

}  // namespace

std::vector<ExperimentConfig> presets() {
    std::vector<ExperimentConfig> out;
    out.push_back(fig2("fig2a", 0, 0));
    out.push_back(fig2("fig2b", 1000, 0));
    out.push_back(fig2("fig2c", 0, 2000));
    out.push_back(fig2("fig2d", -1000, 2000));

    auto fig3 = figure_base("fig3");
    fig3.scheme = Scheme::A;
    fig3.params.beta_tilde = 1.0;
    fig3.initials = {initial(0, 0, 1000.0)};
    fig3.deviation_from = 1.0;
    out.push_back(fig3);

    out.push_back(fig4("fig4a", 0, 0));
    out.push_back(fig4("fig4b", -1000, 2000));

    auto stationary = figure_base("stationary");
    stationary.initials = {initial(0, 1000)};
    stationary.horizon = 5000.0;
    stationary.burn_in = 100.0;
    stationary.batches = 20;
    stationary.outputs = {Output::Stationary};
    out.push_back(stationary);

    auto sweep = figure_base("sweep");
    sweep.initials = {initial(0, 0), initial(1000, 0), initial(0, 2000), initial(-1000, 2000)};
    sweep.r_list = {100.0, 1000.0};
    sweep.replications = 20;
    sweep.outputs = {Output::Sweep};
    out.push_back(sweep);

    auto diffusion = figure_base("diffusion");
    diffusion.initials = {initial(0, 1000)};
    diffusion.horizon = 200.0;
    diffusion.outputs = {Output::DiffusionMoments};
    out.push_back(diffusion);
    return out;
}

ExperimentConfig preset(std::string_view name) {
    auto all = presets();
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& c) { return c.name == name; });
    if (it == all.end()) throw Error(ErrorCode::UnknownPreset, "no preset named '" + std::string(name) + "'");
    return *it;
}

}  // namespace invitesim
