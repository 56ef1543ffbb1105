#include "invitesim/experiment.hpp"

#include "invitesim/diffusion.hpp"
#include "invitesim/error.hpp"
#include "invitesim/fluid.hpp"
#include "invitesim/io.hpp"
#include "invitesim/parallel.hpp"
#include "invitesim/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>

#ifndef INVITESIM_VERSION
#define INVITESIM_VERSION "0.0.0"
#endif

namespace invitesim {

namespace {

constexpr std::pair<Output, std::string_view> kOutputNames[] = {
    {Output::Trajectory, "trajectory"}, {Output::Fluid, "fluid"},           {Output::Overlay, "overlay"},
    {Output::DiffusionMoments, "diffusion"}, {Output::Stationary, "stationary"}, {Output::Sweep, "sweep"},
};

Output output_from_string(std::string_view s) {
    for (const auto& [o, n] : kOutputNames)
        if (n == s) return o;
    throw Error(ErrorCode::ConfigInvalid, "unknown output '" + std::string(s) + "'");
}

bool wants(const ExperimentConfig& c, Output o) {
    return std::find(c.outputs.begin(), c.outputs.end(), o) != c.outputs.end();
}

}  // namespace

std::string_view to_string(Output out) noexcept {
    for (const auto& [o, n] : kOutputNames)
        if (o == out) return n;
    return "unknown";
}

ExperimentConfig config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    ExperimentConfig c;
    try {
        c.name = doc.value("name", c.name);
        const std::string scheme = doc.value("scheme", std::string("B"));
        if (scheme != "A" && scheme != "B") throw Error(ErrorCode::ConfigInvalid, "scheme must be \"A\" or \"B\"");
        c.scheme = scheme == "A" ? Scheme::A : Scheme::B;
        if (doc.contains("params")) {
            auto pd = params_from_json(doc.at("params"));
            c.params = pd.params;
            c.arrival = pd.arrival;
        } else {
            c.arrival = ArrivalRate::constant(c.params.lambda);
        }
        if (doc.contains("initials")) {
            c.initials.clear();
            for (const auto& row : doc.at("initials")) {
                const auto v = row.get<std::vector<double>>();
                if (v.size() < 2 || v.size() > 3)
                    throw Error(ErrorCode::ConfigInvalid, "initial states are [y, x] or [y, x, x_target]");
                SystemState s;
                s.y = std::llround(v[0]);
                s.x = std::llround(v[1]);
                s.x_target = v.size() == 3 ? v[2] : static_cast<double>(s.x);
                c.initials.push_back(s);
            }
        }
        c.horizon = doc.value("horizon", c.horizon);
        c.seed = doc.value("seed", c.seed);
        c.sample_dt = doc.value("sample_dt", c.sample_dt);
        c.deviation_dt = doc.value("deviation_dt", c.deviation_dt);
        c.deviation_from = doc.value("deviation_from", c.deviation_from);
        if (doc.contains("outputs")) {
            c.outputs.clear();
            for (const auto& o : doc.at("outputs")) c.outputs.push_back(output_from_string(o.get<std::string>()));
        }
        c.out_dir = doc.value("out_dir", c.out_dir.string());
        c.workers = doc.value("workers", c.workers);
        c.record_events = doc.value("record_events", c.record_events);
        c.event_budget = doc.value("event_budget", c.event_budget);
        c.fluid_dt = doc.value("fluid_dt", c.fluid_dt);
        c.moment_dt = doc.value("moment_dt", c.moment_dt);
        c.burn_in = doc.value("burn_in", c.burn_in);
        c.batches = doc.value("batches", c.batches);
        c.r_list = doc.value("r_list", c.r_list);
        c.replications = doc.value("replications", c.replications);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    validate_config(c);
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json initials = nlohmann::json::array();
    for (const auto& s : c.initials) {
        if (c.scheme == Scheme::A)
            initials.push_back({s.y, s.x, s.x_target});
        else
            initials.push_back({s.y, s.x});
    }
    std::vector<std::string> outputs;
    for (auto o : c.outputs) outputs.emplace_back(to_string(o));
    return {{"name", c.name},
            {"scheme", c.scheme == Scheme::A ? "A" : "B"},
            {"params", params_to_json(c.params, c.arrival)},
            {"initials", initials},
            {"horizon", c.horizon},
            {"seed", c.seed},
            {"sample_dt", c.sample_dt},
            {"deviation_dt", c.deviation_dt},
            {"deviation_from", c.deviation_from},
            {"outputs", outputs},
            {"out_dir", c.out_dir.string()},
            {"workers", c.workers},
            {"record_events", c.record_events},
            {"event_budget", c.event_budget},
            {"fluid_dt", c.fluid_dt},
            {"moment_dt", c.moment_dt},
            {"burn_in", c.burn_in},
            {"batches", c.batches},
            {"r_list", c.r_list},
            {"replications", c.replications}};
}

void validate_config(const ExperimentConfig& c) {
    try {
        validate_params(c.params, c.scheme);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigInvalid, e.what());
    }
    if (c.initials.empty()) throw Error(ErrorCode::ConfigInvalid, "at least one initial state is required");
    for (const auto& s : c.initials)
        if (s.x < 0 || (c.scheme == Scheme::A && s.x_target < 0.0))
            throw Error(ErrorCode::ConfigInvalid, "initial X and X_target must be >= 0");
    if (!(c.horizon > 0.0)) throw Error(ErrorCode::ConfigInvalid, "horizon must be > 0");
    if (!(c.sample_dt > 0.0) || !(c.deviation_dt > 0.0) || !(c.fluid_dt > 0.0) || !(c.moment_dt > 0.0))
        throw Error(ErrorCode::ConfigInvalid, "time steps must be > 0");
    if (c.deviation_from < 0.0 || c.deviation_from >= c.horizon)
        throw Error(ErrorCode::ConfigInvalid, "deviation_from must lie in [0, horizon)");
    if (c.outputs.empty()) throw Error(ErrorCode::ConfigInvalid, "no outputs requested");
    if (!std::is_sorted(c.r_list.begin(), c.r_list.end()))
        throw Error(ErrorCode::ConfigInvalid, "r_list must be increasing");
    if (c.workers == 0) throw Error(ErrorCode::ConfigInvalid, "workers must be >= 1");
    if ((wants(c, Output::Stationary) || wants(c, Output::DiffusionMoments)) && !c.arrival.is_constant())
        throw Error(ErrorCode::ConfigInvalid, "diffusion and stationary outputs need a constant arrival rate");
    if (wants(c, Output::Stationary) && c.horizon <= c.burn_in)
        throw Error(ErrorCode::ConfigInvalid, "stationary output needs horizon > burn_in");
}

nlohmann::json to_json(const RunManifest& m) {
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : m.files) files.push_back({{"path", f.path}, {"kind", f.kind}, {"crc32", f.checksum}});
    return {{"config", m.config},   {"version", m.version}, {"wall_seconds", m.wall_seconds},
            {"files", files},       {"warnings", m.warnings}, {"summary", m.summary}};
}

PlotData emit_plot_data(const std::vector<PathPoint>& sim, const std::vector<PathPoint>* fluid) {
    PlotData out;
    std::ostringstream os;
    const bool with_fluid = fluid != nullptr && !fluid->empty();
    os << (with_fluid ? "t,sim_y,sim_x,fluid_y,fluid_x\n" : "t,sim_y,sim_x\n");

    bool aligned = with_fluid && fluid->size() == sim.size();
    for (std::size_t i = 0; aligned && i < sim.size(); ++i)
        if ((*fluid)[i].t != sim[i].t) aligned = false;
    out.resampled = with_fluid && !aligned;

    std::size_t j = 0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        const auto& s = sim[i];
        os << format_number(s.t) << ',' << format_number(s.y) << ',' << format_number(s.x);
        if (with_fluid) {
            double fy, fx;
            if (aligned) {
                fy = (*fluid)[i].y;
                fx = (*fluid)[i].x;
            } else {
                const auto& f = *fluid;
                while (j + 1 < f.size() && f[j + 1].t <= s.t) ++j;
                if (s.t <= f.front().t || j + 1 >= f.size()) {
                    const auto& e = s.t <= f.front().t ? f.front() : f.back();
                    fy = e.y;
                    fx = e.x;
                } else {
                    const double w = (s.t - f[j].t) / (f[j + 1].t - f[j].t);
                    fy = f[j].y + w * (f[j + 1].y - f[j].y);
                    fx = f[j].x + w * (f[j + 1].x - f[j].x);
                }
            }
            os << ',' << format_number(fy) << ',' << format_number(fx);
        }
        os << '\n';
    }
    out.csv = os.str();
    return out;
}

namespace {

struct InitialResult {
    std::optional<Trajectory> traj;
    std::optional<FluidTrajectory> fluid;
    std::optional<TVFluidTrajectory> fluid_tv;
};

class Writer {
public:
    Writer(const std::filesystem::path& dir, RunManifest& manifest) : dir_(dir), manifest_(manifest) {}

    void text(const std::string& name, const std::string& kind, std::string_view content) {
        const auto path = dir_ / name;
        write_text_file(path, content);
        manifest_.files.push_back({name, kind, file_checksum(path)});
    }
    void json(const std::string& name, const std::string& kind, const nlohmann::json& doc) {
        text(name, kind, doc.dump(2) + "\n");
    }

private:
    std::filesystem::path dir_;
    RunManifest& manifest_;
};

std::string indexed(const std::string& stem, std::size_t i, const std::string& ext) {
    return stem + "_" + std::to_string(i) + ext;
}

}  // namespace

RunManifest run(const ExperimentConfig& config) {
    validate_config(config);
    const auto started = std::chrono::steady_clock::now();
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec || !std::filesystem::is_directory(config.out_dir))
        throw Error(ErrorCode::OutputDirUnwritable, config.out_dir.string() + ": " + ec.message());

    RunManifest manifest;
    manifest.config = config_to_json(config);
    manifest.version = INVITESIM_VERSION;
    Writer writer(config.out_dir, manifest);
    const auto& p = config.params;
    const bool constant = config.arrival.is_constant();

    const bool need_sim = wants(config, Output::Trajectory) || wants(config, Output::Overlay);
    const bool need_fluid = wants(config, Output::Fluid) || wants(config, Output::Overlay);
    std::vector<InitialResult> results(config.initials.size());
    if (need_sim || need_fluid) {
        parallel_for(config.initials.size(), config.workers, [&](std::size_t i) {
            const auto& init = config.initials[i];
            auto& res = results[i];
            if (need_sim) {
                RandomStream rng(config.seed, i);
                SamplingSpec sampling;
                sampling.dt = config.sample_dt;
                sampling.record_events = config.record_events;
                sampling.event_budget = config.event_budget;
                res.traj = config.scheme == Scheme::A
                               ? simulate_a(init, p, config.arrival, config.horizon, rng, sampling)
                               : simulate_b(init, p, config.arrival, config.horizon, rng, sampling);
            }
            if (need_fluid) {
                // Scheme A lifts X to ceil(X_target) at its first event; the fluid starts from that state.
                const long long x0 = config.scheme == Scheme::A
                                         ? std::max(init.x, static_cast<long long>(std::ceil(init.x_target)))
                                         : init.x;
                if (constant)
                    res.fluid = solve_fluid(fluid_scale_point(init.y, x0, p, true), p, config.horizon);
                else
                    res.fluid_tv = solve_fluid_tv(fluid_scale_point(init.y, x0, p, false), config.arrival, p,
                                                  config.horizon, config.fluid_dt);
            }
        });
    }

    nlohmann::json deviations = nlohmann::json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& res = results[i];
        if (res.traj && wants(config, Output::Trajectory)) {
            std::ostringstream os;
            write_trajectory_csv(os, *res.traj);
            writer.text(indexed("trajectory", i, ".csv"), "trajectory", os.str());
            if (config.scheme == Scheme::A) {
                std::ostringstream gap;
                gap << "t,x_minus_target,abs_gap_scaled\n";
                for (const auto& s : res.traj->samples) {
                    const double d = static_cast<double>(s.x) - s.x_target;
                    gap << format_number(s.t) << ',' << format_number(d) << ','
                        << format_number(std::abs(d) / p.scale_r) << '\n';
                }
                writer.text(indexed("target_gap", i, ".csv"), "target_gap", gap.str());
            }
            if (config.record_events) {
                std::ostringstream ev;
                write_event_log_jsonl(ev, *res.traj);
                writer.text(indexed("events", i, ".jsonl"), "event_log", ev.str());
                if (res.traj->events_truncated)
                    manifest.warnings.push_back(indexed("events", i, ".jsonl") + ": event budget reached, log truncated");
            }
        }
        if (wants(config, Output::Fluid) || wants(config, Output::Overlay)) {
            std::ostringstream os;
            if (res.fluid) {
                write_fluid_csv(os, *res.fluid, config.sample_dt);
                writer.json(indexed("fluid_segments", i, ".json"), "fluid_segments", segments_json(*res.fluid));
            } else if (res.fluid_tv) {
                const auto stride =
                    static_cast<std::size_t>(std::max(1.0, std::round(config.sample_dt / config.fluid_dt)));
                write_fluid_tv_csv(os, *res.fluid_tv, stride);
            }
            writer.text(indexed("fluid", i, ".csv"), "fluid", os.str());
        }
        if (wants(config, Output::Overlay) && res.traj) {
            const auto scaled = fluid_scale(*res.traj, constant ? Centering::Centered : Centering::Uncentered);
            std::vector<PathPoint> sim;
            sim.reserve(scaled.samples.size());
            for (const auto& s : scaled.samples) sim.push_back({s.t, s.y, s.x});
            std::vector<PathPoint> fl;
            if (res.fluid) {
                for (const auto& s : sim) {
                    const Vec2 v = res.fluid->state(s.t);
                    fl.push_back({s.t, v(0), v(1)});
                }
            } else {
                for (const auto& s : res.fluid_tv->samples) fl.push_back({s.t, s.y, s.x});
            }
            const auto plot = emit_plot_data(sim, &fl);
            if (plot.resampled)
                manifest.warnings.push_back(indexed("overlay", i, ".csv") +
                                            ": fluid path resampled onto the simulation grid by linear interpolation");
            writer.text(indexed("overlay", i, ".csv"), "overlay", plot.csv);

            const Curve fluid_curve = res.fluid ? as_curve(*res.fluid) : as_curve(*res.fluid_tv);
            const auto dev =
                sup_deviation(as_curve(scaled), fluid_curve, {config.deviation_from, config.horizon, config.deviation_dt});
            auto doc = to_json(dev);
            doc["seed"] = res.traj->seed;
            doc["stream"] = res.traj->stream;
            doc["initial"] = {config.initials[i].y, config.initials[i].x};
            doc["params"] = params_to_json(p, config.arrival);
            writer.json(indexed("deviation", i, ".json"), "deviation_report", doc);
            deviations.push_back(dev.sup);
        }
    }
    if (!deviations.empty()) manifest.summary["sup_deviation"] = deviations;

    if (wants(config, Output::DiffusionMoments)) {
        const auto& init = config.initials.front();
        const Vec2 m0 = diffusion_scale_point(static_cast<double>(init.y), static_cast<double>(init.x), p);
        const auto stride = static_cast<std::size_t>(std::max(1.0, std::round(config.sample_dt / config.moment_dt)));
        const auto path = moment_ode(m0, Mat2::Zero(), p, config.horizon, config.moment_dt, stride);
        std::ostringstream os;
        write_moments_csv(os, path);
        writer.text("moments.csv", "moments", os.str());
        const Mat2 vinf = stationary_covariance(p);
        const auto& last = path.back();
        writer.json("diffusion_stationary.json", "stationary_covariance",
                    {{"V_inf", {{vinf(0, 0), vinf(0, 1)}, {vinf(1, 0), vinf(1, 1)}}},
                     {"lyapunov_residual", lyapunov_residual(vinf, p)},
                     {"V_horizon", {{last.cov(0, 0), last.cov(0, 1)}, {last.cov(1, 0), last.cov(1, 1)}}},
                     {"distance_to_V_inf", (last.cov - vinf).norm()},
                     {"params", params_to_json(p, config.arrival)}});
    }

    if (wants(config, Output::Stationary)) {
        RandomStream rng(config.seed, 0);
        SamplingSpec sampling;
        sampling.dt = config.sample_dt;
        const auto& init = config.initials.front();
        const auto traj = config.scheme == Scheme::A
                              ? simulate_a(init, p, config.arrival, config.horizon, rng, sampling)
                              : simulate_b(init, p, config.arrival, config.horizon, rng, sampling);
        const auto fluid_est = batch_means(to_series(fluid_scale(traj, Centering::Centered)), config.burn_in,
                                           config.batches);
        const auto diff_est = stationary_moments(traj, config.burn_in, config.batches);
        const auto check = gaussian_check(diff_est, p);
        writer.json("stationary.json", "stationary_report",
                    {{"seed", config.seed},
                     {"stream", 0},
                     {"params", params_to_json(p, config.arrival)},
                     {"events", traj.event_count},
                     {"fluid_scale", to_json(fluid_est)},
                     {"diffusion_scale", to_json(diff_est)},
                     {"gaussian_check", to_json(check)}});
        manifest.summary["gaussian_check_pass"] = check.pass;
    }

    if (wants(config, Output::Sweep)) {
        std::vector<FluidState> initials;
        for (const auto& s : config.initials) initials.push_back(fluid_scale_point(s.y, s.x, p, true));
        SweepOptions opt;
        opt.horizon = config.horizon;
        opt.replications = config.replications;
        opt.seed = config.seed;
        opt.workers = config.workers;
        opt.sample_dt = config.sample_dt;
        opt.grid_dt = config.deviation_dt;
        const auto sweep = scale_sweep(config.r_list, initials, p, opt);
        std::ostringstream os;
        write_sweep_csv(os, sweep);
        writer.text("sweep.csv", "sweep", os.str());
        manifest.summary["sweep_monotone_decreasing"] = sweep.monotone_decreasing;
        manifest.summary["sweep_loglog_slope"] = sweep.loglog_slope;
    }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_json_file(config.out_dir / "manifest.json", to_json(manifest));
    return manifest;
}

}  // namespace invitesim
