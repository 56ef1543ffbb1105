#include "invitesim/acceptance.hpp"

#include "invitesim/ctmc.hpp"
#include "invitesim/diffusion.hpp"
#include "invitesim/error.hpp"
#include "invitesim/fluid.hpp"
#include "invitesim/parallel.hpp"
#include "invitesim/reference_fluid.hpp"
#include "invitesim/stats.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>

namespace invitesim {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::uint64_t stream_id(std::uint64_t criterion, std::uint64_t a, std::uint64_t b = 0) {
    return (criterion << 40) | (a << 20) | b;
}

/// The parameter set of the published experiments: lambda 1, r 1000, beta 1, gamma 2, epsilon 0.2.
ModelParams baseline() { return ModelParams{}; }

CriterionResult criterion(int id, std::string name, std::string suite) {
    CriterionResult c;
    c.id = id;
    c.name = std::move(name);
    c.suite = std::move(suite);
    return c;
}

SystemState make_state(long long y, long long x) {
    SystemState s;
    s.y = y;
    s.x = x;
    s.x_target = static_cast<double>(x);
    return s;
}

// ---------------------------------------------------------------------------------------------

CriterionResult generator_drift(const AcceptanceOptions& opt) {
    auto res = criterion(1, "generator-correctness", "generator");
    const ModelParams p = baseline();
    const auto arrival = ArrivalRate::constant(p.lambda);
    constexpr double dt = 1e-4;
    constexpr std::size_t reps = 100'000;
    const std::vector<std::pair<long long, long long>> states = {
        {-50, 0}, {-1, 0},   {0, 0},     {1, 0},    {50, 0},    {-50, 1},    {-1, 1},
        {0, 1},   {1, 1},    {50, 1},    {-300, 3}, {0, 5},     {2, 5},      {300, 2},
        {-5, 1000}, {0, 1000}, {5, 1000}, {-20, 2500}, {20, 2500}, {200, 500},
    };

    // Drift written straight from the transition rules.
    auto oracle = [&](long long y, long long x) {
        const double big = p.lambda * p.scale_r;
        const double acc = p.beta * static_cast<double>(x);
        const double fb = p.epsilon * std::abs(static_cast<double>(y));
        const double fb_dx = y < 0 ? 1.0 : (y > 0 && x >= 1 ? -1.0 : 0.0);
        const double g = p.gamma;
        return std::array<double, 2>{-big + acc, g * big - std::min(g, static_cast<double>(x)) * acc + fb * fb_dx};
    };

    struct Row {
        std::array<double, 2> mean, se, expected;
    };
    std::vector<Row> rows(states.size());
    parallel_for(states.size(), opt.workers, [&](std::size_t k) {
        const auto [y0, x0] = states[k];
        RandomStream rng(opt.seed, stream_id(1, k));
        std::array<double, 2> sum{}, sum2{};
        for (std::size_t i = 0; i < reps; ++i) {
            CtmcSimulator sim(Scheme::B, p, arrival, make_state(y0, x0), rng, dt);
            sim.advance_to(dt);
            const double d[2] = {static_cast<double>(sim.state().y - y0), static_cast<double>(sim.state().x - x0)};
            for (int c = 0; c < 2; ++c) {
                sum[c] += d[c];
                sum2[c] += d[c] * d[c];
            }
        }
        const auto drift = oracle(y0, x0);
        Row& r = rows[k];
        for (int c = 0; c < 2; ++c) {
            const double n = static_cast<double>(reps);
            r.mean[c] = sum[c] / n;
            const double var = (sum2[c] - n * r.mean[c] * r.mean[c]) / (n - 1.0);
            r.se[c] = std::sqrt(std::max(var, 0.0) / n);
            r.expected[c] = drift[c] * dt;
        }
    });

    nlohmann::json table = nlohmann::json::array();
    double worst = 0.0;
    std::size_t failures = 0;
    for (std::size_t k = 0; k < states.size(); ++k) {
        const auto& r = rows[k];
        std::array<double, 2> z{};
        for (int c = 0; c < 2; ++c) {
            z[c] = r.se[c] > 0.0 ? std::abs(r.mean[c] - r.expected[c]) / r.se[c]
                                 : (r.mean[c] == r.expected[c] ? 0.0 : INFINITY);
            worst = std::max(worst, z[c]);
        }
        const bool ok = z[0] <= 3.0 && z[1] <= 3.0;
        if (!ok) ++failures;
        table.push_back({{"y", states[k].first},
                         {"x", states[k].second},
                         {"mean_dy", r.mean[0]},
                         {"expected_dy", r.expected[0]},
                         {"se_dy", r.se[0]},
                         {"mean_dx", r.mean[1]},
                         {"expected_dx", r.expected[1]},
                         {"se_dx", r.se[1]},
                         {"pass", ok}});
        res.details.push_back("(y=" + std::to_string(states[k].first) + ", x=" + std::to_string(states[k].second) +
                              ")  dY " + num(r.mean[0]) + " vs " + num(r.expected[0]) + " (z " + num(z[0], 3) +
                              ")  dX " + num(r.mean[1]) + " vs " + num(r.expected[1]) + " (z " + num(z[1], 3) + ")" +
                              (ok ? "" : "  FAIL"));
    }
    res.pass = failures == 0;
    res.measured = {{"states", table}, {"max_abs_z", worst}, {"failing_states", failures}};
    res.threshold = {{"max_abs_z", 3.0}, {"dt", dt}, {"replicates", reps}};
    res.brief = std::to_string(states.size()) + " states, max |z| " + num(worst, 3) + " (<= 3)";
    return res;
}

// ---------------------------------------------------------------------------------------------

const std::array<FluidState, 4> kFigureInitials = {FluidState(0.0, -1.0), FluidState(1.0, -1.0),
                                                   FluidState(0.0, 1.0), FluidState(-1.0, 1.0)};

CriterionResult fluid_convergence(const AcceptanceOptions& opt) {
    auto res = criterion(2, "fluid-convergence", "fluid-convergence");
    const std::array<double, 2> r_list = {100.0, 1000.0};
    const std::array<double, 2> limits = {0.08, 0.03};
    constexpr std::size_t reps = 20;
    constexpr std::size_t required = 18;
    constexpr double horizon = 50.0;

    std::vector<double> sups(r_list.size() * kFigureInitials.size() * reps);
    const std::size_t per_r = kFigureInitials.size() * reps;
    parallel_for(sups.size(), opt.workers, [&](std::size_t idx) {
        const std::size_t ri = idx / per_r;
        const std::size_t ii = (idx % per_r) / reps;
        const std::size_t rep = idx % reps;
        ModelParams p = baseline();
        p.scale_r = r_list[ri];
        const SystemState init = ctmc_initial_from_fluid(kFigureInitials[ii], p);
        const auto fluid = solve_fluid(fluid_scale_point(init.y, init.x, p), p, horizon);
        RandomStream rng(opt.seed, stream_id(2, ii, rep));
        const auto traj = simulate_b(init, p, ArrivalRate::constant(p.lambda), horizon, rng);
        const auto scaled = fluid_scale(traj, Centering::Centered);
        sups[idx] = sup_deviation(as_curve(scaled), as_curve(fluid), {0.0, horizon, 0.05}).sup;
    });

    bool counts_ok = true;
    std::vector<double> means;
    nlohmann::json per_r_json = nlohmann::json::array();
    for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
        double total = 0.0;
        nlohmann::json per_initial = nlohmann::json::array();
        for (std::size_t ii = 0; ii < kFigureInitials.size(); ++ii) {
            std::size_t within = 0;
            double worst = 0.0, sum = 0.0;
            for (std::size_t rep = 0; rep < reps; ++rep) {
                const double s = sups[ri * per_r + ii * reps + rep];
                within += s <= limits[ri] ? 1 : 0;
                worst = std::max(worst, s);
                sum += s;
            }
            total += sum;
            counts_ok = counts_ok && within >= required;
            per_initial.push_back({{"initial", {kFigureInitials[ii](0), kFigureInitials[ii](1)}},
                                   {"within", within},
                                   {"mean_sup", sum / reps},
                                   {"max_sup", worst}});
            res.details.push_back("r=" + num(r_list[ri]) + " initial (" + num(kFigureInitials[ii](0)) + ", " +
                                  num(kFigureInitials[ii](1)) + "): mean sup " + num(sum / reps, 3) + ", max " +
                                  num(worst, 3) + ", " + std::to_string(within) + "/20 <= " + num(limits[ri]));
        }
        means.push_back(total / static_cast<double>(per_r));
        per_r_json.push_back({{"r", r_list[ri]}, {"limit", limits[ri]}, {"mean_sup", means.back()}, {"per_initial", per_initial}});
    }
    const bool decreasing = means[1] < means[0];
    res.pass = counts_ok && decreasing;
    res.measured = {{"per_r", per_r_json}, {"mean_decreasing", decreasing}};
    res.threshold = {{"sup_limit", {{"100", limits[0]}, {"1000", limits[1]}}},
                     {"required_within", required},
                     {"replications", reps}};
    res.brief = "mean sup " + num(means[0], 3) + " (r=100, limit " + num(limits[0]) + "), " + num(means[1], 3) +
                " (r=1000, limit " + num(limits[1]) + "); decreasing " + (decreasing ? "yes" : "no");
    return res;
}

// ---------------------------------------------------------------------------------------------

CriterionResult fluid_properties(const AcceptanceOptions& opt) {
    auto res = criterion(3, "fluid-properties", "fluid-properties");
    const ModelParams p = baseline();
    const auto spec = spectral_decompose(p);
    constexpr std::size_t n = 100;
    const double horizon = 50.0 / spec.nu1;
    const double floor_x = -p.lambda / p.beta;

    std::vector<double> times;
    for (std::size_t k = 0; k <= 1000; ++k) times.push_back(0.05 * static_cast<double>(k));

    struct Row {
        FluidState u0;
        std::size_t boundary_segments;
        double decay_ratio, boundary_drift, final_norm, ref_error;
    };
    std::vector<Row> rows(n);
    RandomStream rng(opt.seed, stream_id(3, 0));
    for (auto& r : rows) {
        const double y = -20.0 + 40.0 * rng.uniform();
        const double x = floor_x + (20.0 - floor_x) * rng.uniform();
        r.u0 = FluidState(y, x);
    }
    parallel_for(n, opt.workers, [&](std::size_t i) {
        Row& r = rows[i];
        const auto traj = solve_fluid(r.u0, p, horizon);
        const auto drift = drift_check(traj, 0.01);
        r.boundary_segments = traj.boundary_segments();
        r.decay_ratio = drift.min_interior_decay_ratio;
        r.boundary_drift = drift.max_boundary_drift;
        r.final_norm = star_norm(traj.state(horizon), spec);
        const auto ref = reference::integrate_fluid(r.u0, p, times);
        r.ref_error = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k)
            r.ref_error = std::max(r.ref_error, (traj.state(times[k]) - ref.states[k]).cwiseAbs().maxCoeff());
    });

    std::size_t max_segments = 0, with_boundary = 0;
    double min_ratio = INFINITY, max_drift = -INFINITY, max_norm = 0.0, max_ref = 0.0;
    for (const auto& r : rows) {
        max_segments = std::max(max_segments, r.boundary_segments);
        with_boundary += r.boundary_segments > 0 ? 1 : 0;
        min_ratio = std::min(min_ratio, r.decay_ratio);
        max_drift = std::max(max_drift, r.boundary_drift);
        max_norm = std::max(max_norm, r.final_norm);
        max_ref = std::max(max_ref, r.ref_error);
    }
    const double ratio_floor = spec.nu1 * (1.0 - 1e-6);
    const bool a = max_segments <= 1;
    const bool b = min_ratio >= ratio_floor;
    const bool c = max_drift < 0.0;
    const bool d = max_norm <= 1e-3;
    const bool e = max_ref <= 1e-6;
    res.pass = a && b && c && d && e;
    auto flag = [](bool ok) { return ok ? "ok" : "FAIL"; };
    res.details = {
        std::string("(a) max boundary segments ") + std::to_string(max_segments) + " (<= 1), " +
            std::to_string(with_boundary) + " paths touch the boundary " + flag(a),
        std::string("(b) min interior decay ratio ") + num(min_ratio, 8) + " (>= " + num(ratio_floor, 8) + ") " +
            flag(b),
        std::string("(c) max boundary drift ") + num(max_drift, 4) + " (< 0) " + flag(c),
        std::string("(d) max |state(50/nu1)|* ") + num(max_norm, 3) + " (<= 1e-3) " + flag(d),
        std::string("(e) max deviation from adaptive integration ") + num(max_ref, 3) + " (<= 1e-6) " + flag(e),
    };
    res.measured = {{"max_boundary_segments", max_segments},
                    {"paths_with_boundary", with_boundary},
                    {"min_interior_decay_ratio", min_ratio},
                    {"max_boundary_drift", std::isfinite(max_drift) ? nlohmann::json(max_drift) : nlohmann::json()},
                    {"max_final_star_norm", max_norm},
                    {"max_reference_error", max_ref}};
    res.threshold = {{"max_boundary_segments", 1},
                     {"min_interior_decay_ratio", ratio_floor},
                     {"max_boundary_drift", "< 0"},
                     {"max_final_star_norm", 1e-3},
                     {"max_reference_error", 1e-6}};
    res.brief = std::to_string(n) + " initials; segments<=1 " + flag(a) + ", decay " + flag(b) + ", boundary drift " +
                flag(c) + ", final norm " + flag(d) + ", reference err " + num(max_ref, 3);
    return res;
}

// ---------------------------------------------------------------------------------------------

struct LongRun {
    StationaryEstimate fluid;
    StationaryEstimate diffusion;
    std::size_t events = 0;
    double seconds = 0.0;
};

LongRun long_run(const AcceptanceOptions& opt) {
    const auto t0 = Clock::now();
    const ModelParams p = baseline();
    RandomStream rng(opt.seed, stream_id(4, 0));
    const auto traj = simulate_b(make_state(0, 1000), p, ArrivalRate::constant(p.lambda), 5000.0, rng);
    LongRun out;
    out.fluid = batch_means(to_series(fluid_scale(traj, Centering::Centered)), 100.0, 20);
    out.diffusion = stationary_moments(traj, 100.0, 20);
    out.events = traj.event_count;
    out.seconds = seconds_since(t0);
    return out;
}

CriterionResult stationary_concentration(const LongRun& run) {
    auto res = criterion(4, "stationary-concentration", "stationary-concentration");
    constexpr double bound = 0.02;
    const auto& est = run.fluid;
    bool ok = true;
    nlohmann::json intervals = nlohmann::json::array();
    const char* names[2] = {"mean_y", "mean_x"};
    for (int c = 0; c < 2; ++c) {
        const double lo = est.mean(c) - est.mean_half_width(c);
        const double hi = est.mean(c) + est.mean_half_width(c);
        const bool inside = lo > -bound && hi < bound;
        ok = ok && inside;
        intervals.push_back({{"name", names[c]}, {"estimate", est.mean(c)}, {"ci", {lo, hi}}, {"inside", inside}});
        res.details.push_back(std::string(names[c]) + " " + num(est.mean(c), 3) + "  CI [" + num(lo, 3) + ", " +
                              num(hi, 3) + "]" + (inside ? "" : "  FAIL"));
    }
    res.pass = ok;
    res.seconds = run.seconds;
    res.measured = {{"intervals", intervals}, {"batches", est.batches}, {"events", run.events}};
    res.threshold = {{"interval", {-bound, bound}}, {"horizon", 5000.0}, {"burn_in", 100.0}, {"r", 1000.0}};
    res.brief = "CIs [" + num(est.mean(0) - est.mean_half_width(0), 3) + ", " +
                num(est.mean(0) + est.mean_half_width(0), 3) + "] and [" +
                num(est.mean(1) - est.mean_half_width(1), 3) + ", " + num(est.mean(1) + est.mean_half_width(1), 3) +
                "] inside (-0.02, 0.02)";
    return res;
}

CriterionResult diffusion_stationary(const LongRun& run) {
    auto res = criterion(5, "diffusion-stationary", "diffusion-stationary");
    const auto report = gaussian_check(run.diffusion, baseline());
    bool ok = true;
    nlohmann::json entries = nlohmann::json::array();
    res.details.push_back("entry               estimate   reference  half-width  tolerance  pass");
    for (const auto& e : report.entries) {
        const bool counted = e.name != "mean_y" && e.name != "mean_x";
        if (counted) ok = ok && e.pass;
        entries.push_back({{"name", e.name},
                           {"estimate", e.estimate},
                           {"reference", e.reference},
                           {"half_width", e.half_width},
                           {"tolerance", e.tolerance},
                           {"pass", e.pass},
                           {"counted", counted}});
        char line[160];
        std::snprintf(line, sizeof line, "%-18s %10.4f %11.4f %11.4f %10.4f  %s%s", e.name.c_str(), e.estimate,
                      e.reference, e.half_width, e.tolerance, e.pass ? "yes" : "no", counted ? "" : " (info)");
        res.details.emplace_back(line);
    }
    res.pass = ok;
    res.seconds = run.seconds;
    res.measured = {{"entries", entries}, {"batches", run.diffusion.batches}};
    res.threshold = {{"cov_relative", 0.10}, {"skew", "0.1 + CI"}, {"excess_kurtosis", "0.2 + CI"}};
    const auto& v = run.diffusion.cov;
    res.brief = "Var(Y) " + num(v(0, 0), 3) + " Cov " + num(v(0, 1), 3) + " Var(X) " + num(v(1, 1), 3) +
                " vs 0.5, -1, 2.1 (+-10%); skew " + num(run.diffusion.skew_y, 2) + ", kurt " +
                num(run.diffusion.excess_kurtosis_y, 2);
    return res;
}

// ---------------------------------------------------------------------------------------------

CriterionResult closed_form(const AcceptanceOptions& opt) {
    auto res = criterion(6, "closed-form", "closed-form");
    RandomStream rng(opt.seed, stream_id(6, 0));
    double max_residual = 0.0;
    for (int i = 0; i < 50; ++i) {
        ModelParams p;
        p.lambda = 0.5 + 1.5 * rng.uniform();
        p.beta = 0.5 + 1.5 * rng.uniform();
        p.gamma = 1.0 + 3.0 * rng.uniform();
        p.epsilon = (0.05 + 0.9 * rng.uniform()) * p.gamma * p.gamma * p.beta / 4.0;
        p.randomized_rounding = true;
        validate_params(p);
        max_residual = std::max(max_residual, lyapunov_residual(stationary_covariance(p), p));
    }
    const ModelParams p = baseline();
    const auto path = moment_ode(Vec2::Zero(), Mat2::Zero(), p, 200.0, 1e-3, 200'000);
    const double gap = (path.back().cov - stationary_covariance(p)).norm();
    res.pass = max_residual <= 1e-10 && gap <= 1e-6;
    res.measured = {{"max_lyapunov_residual", max_residual}, {"distance_V200_Vinf", gap}, {"t_final", path.back().t}};
    res.threshold = {{"max_lyapunov_residual", 1e-10}, {"distance_V200_Vinf", 1e-6}};
    res.brief = "max residual " + num(max_residual, 3) + " (<= 1e-10), |V(200) - V(inf)| " + num(gap, 3) +
                " (<= 1e-6)";
    return res;
}

// ---------------------------------------------------------------------------------------------

CriterionResult sde_ode(const AcceptanceOptions& opt) {
    auto res = criterion(7, "sde-ode", "sde-ode");
    const ModelParams p = baseline();
    constexpr std::size_t paths = 10'000;
    constexpr double dt = 1e-3;
    const Vec2 m0(1.0, -1.0);
    const std::array<double, 2> checkpoints = {1.0, 5.0};
    const std::size_t stride = 1000;

    std::vector<std::array<Vec2, 2>> ends(paths);
    parallel_for(paths, opt.workers, [&](std::size_t k) {
        RandomStream rng(opt.seed, stream_id(7, k));
        const auto path = simulate_sde(m0, p, checkpoints.back(), rng, {dt, stride, 1.0});
        for (std::size_t c = 0; c < checkpoints.size(); ++c) {
            const auto it = std::find_if(path.begin(), path.end(), [&](const DiffusionSample& s) {
                return std::abs(s.t - checkpoints[c]) < 1e-9;
            });
            if (it == path.end()) throw Error(ErrorCode::GridOutsideHorizon, "SDE checkpoint missing");
            ends[k][c] = it->state;
        }
    });
    const auto ode = moment_ode(m0, Mat2::Zero(), p, checkpoints.back(), dt, stride);

    bool ok = true;
    double worst = 0.0;
    nlohmann::json table = nlohmann::json::array();
    const double n = static_cast<double>(paths);
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        const auto it = std::find_if(ode.begin(), ode.end(),
                                     [&](const MomentState& m) { return std::abs(m.t - checkpoints[c]) < 1e-9; });
        if (it == ode.end()) throw Error(ErrorCode::GridOutsideHorizon, "moment checkpoint missing");
        Vec2 mean = Vec2::Zero();
        for (const auto& e : ends) mean += e[c];
        mean /= n;
        Mat2 cov = Mat2::Zero();
        for (const auto& e : ends) {
            const Vec2 d = e[c] - mean;
            cov += d.transpose() * d;
        }
        cov /= n - 1.0;

        auto check = [&](const std::string& name, double est, double ref, double se) {
            const double z = std::abs(est - ref) / se;
            worst = std::max(worst, z);
            const bool pass = z <= 3.0;
            ok = ok && pass;
            table.push_back({{"t", checkpoints[c]},
                             {"name", name},
                             {"sde", est},
                             {"ode", ref},
                             {"se", se},
                             {"pass", pass}});
            res.details.push_back("t=" + num(checkpoints[c]) + " " + name + ": sde " + num(est, 5) + ", ode " +
                                  num(ref, 5) + ", z " + num(z, 3) + (pass ? "" : "  FAIL"));
        };
        for (int i = 0; i < 2; ++i)
            check(i == 0 ? "mean_y" : "mean_x", mean(i), it->mean(i), std::sqrt(cov(i, i) / n));
        const std::array<std::pair<int, int>, 3> idx = {{{0, 0}, {0, 1}, {1, 1}}};
        const char* names[3] = {"V11", "V12", "V22"};
        for (std::size_t q = 0; q < idx.size(); ++q) {
            const auto [i, j] = idx[q];
            double s = 0.0, s2 = 0.0;
            for (const auto& e : ends) {
                const double prod = (e[c](i) - mean(i)) * (e[c](j) - mean(j));
                s += prod;
                s2 += prod * prod;
            }
            const double m = s / n;
            const double se = std::sqrt((s2 / n - m * m) / n);
            check(names[q], cov(i, j), it->cov(i, j), se);
        }
    }
    res.pass = ok;
    res.measured = {{"comparisons", table}, {"max_abs_z", worst}};
    res.threshold = {{"max_abs_z", 3.0}, {"paths", paths}, {"dt", dt}};
    res.brief = "10 comparisons at t=1,5; max |z| " + num(worst, 3) + " (<= 3)";
    return res;
}

// ---------------------------------------------------------------------------------------------

CriterionResult scheme_a(const AcceptanceOptions& opt) {
    auto res = criterion(8, "scheme-a-vs-b", "scheme-a");
    ModelParams p = baseline();
    p.beta_tilde = 1.0;
    constexpr double t_from = 1.0, horizon = 50.0;
    SystemState init = make_state(0, 0);
    init.x_target = 1000.0;
    RandomStream rng(opt.seed, stream_id(8, 0));
    const auto traj = simulate_a(init, p, ArrivalRate::constant(p.lambda), horizon, rng);

    double gap_sum = 0.0;
    std::size_t gap_n = 0;
    double gap_max = 0.0;
    for (const auto& s : traj.samples) {
        if (s.t < t_from || s.t >= horizon) continue;
        const double g = std::abs(static_cast<double>(s.x) - s.x_target) / p.scale_r;
        gap_sum += g;
        gap_max = std::max(gap_max, g);
        ++gap_n;
    }
    const double gap_avg = gap_n ? gap_sum / static_cast<double>(gap_n) : INFINITY;
    // X is raised to ceil(X_target) by the first event, so the comparison fluid starts there.
    const auto effective_x = std::max(init.x, static_cast<long long>(std::ceil(init.x_target)));
    const auto fluid = solve_fluid(fluid_scale_point(init.y, effective_x, p), p, horizon);
    const auto dev = sup_deviation(as_curve(fluid_scale(traj, Centering::Centered)), as_curve(fluid),
                                   {t_from, horizon, 0.05});
    const bool gap_ok = gap_avg <= 0.02;
    const bool dev_ok = dev.sup <= 0.05;
    res.pass = gap_ok && dev_ok;
    res.measured = {{"mean_abs_gap_scaled", gap_avg},
                    {"max_abs_gap_scaled", gap_max},
                    {"sup_deviation", dev.sup},
                    {"sup_deviation_y", dev.sup_y},
                    {"sup_deviation_x", dev.sup_x},
                    {"t_at_sup", dev.t_at_sup},
                    {"fluid_initial", {static_cast<double>(init.y) / p.scale_r,
                                       static_cast<double>(effective_x) / p.scale_r - p.lambda / p.beta}},
                    {"events", traj.event_count}};
    res.threshold = {{"mean_abs_gap_scaled", 0.02}, {"sup_deviation", 0.05}, {"window", {t_from, horizon}}};
    res.brief = "mean |X - X_target|/r " + num(gap_avg, 3) + " (<= 0.02), sup deviation " + num(dev.sup, 3) +
                " (<= 0.05; y " + num(dev.sup_y, 3) + ", x " + num(dev.sup_x, 3) + ")";
    return res;
}

// ---------------------------------------------------------------------------------------------

CriterionResult time_varying(const AcceptanceOptions& opt) {
    auto res = criterion(9, "time-varying", "time-varying");
    const ModelParams p = baseline();
    const auto arrival = ArrivalRate::sinusoid(1.0, 0.2, 120.0);
    constexpr double horizon = 500.0, dev_from = 5.0, dev_dt = 0.05, y_from = 50.0;
    constexpr double sup_limit = 0.05, y_limit = 100.0;
    constexpr std::size_t reps = 20, required = 18;
    const std::array<SystemState, 2> initials = {make_state(0, 0), make_state(-1000, 2000)};

    std::vector<TVFluidTrajectory> fluids;
    for (const auto& s : initials)
        fluids.push_back(solve_fluid_tv(fluid_scale_point(s.y, s.x, p, false), arrival, p, horizon, 1e-3));

    struct Outcome {
        double sup;
        long long max_abs_y;
    };
    std::vector<Outcome> out(initials.size() * reps);
    parallel_for(out.size(), opt.workers, [&](std::size_t idx) {
        const std::size_t ii = idx / reps, rep = idx % reps;
        RandomStream rng(opt.seed, stream_id(9, ii, rep));
        CtmcSimulator sim(Scheme::B, p, arrival, initials[ii], rng, horizon);
        long long y = initials[ii].y;
        long long max_y = 0;
        bool tracking = false;
        auto sink = [&](const EventRecord& e) {
            y += e.dy;
            if (tracking) max_y = std::max(max_y, std::llabs(y));
        };
        double sup = 0.0;
        const auto steps = static_cast<std::size_t>(std::llround((horizon - dev_from) / dev_dt));
        for (std::size_t k = 0; k <= steps; ++k) {
            const double t = std::min(dev_from + dev_dt * static_cast<double>(k), horizon);
            if (!tracking && t >= y_from) {
                sim.advance_to(y_from, sink);
                tracking = true;
                max_y = std::llabs(sim.state().y);
            }
            sim.advance_to(t, sink);
            const Vec2 scaled(static_cast<double>(sim.state().y) / p.scale_r,
                              static_cast<double>(sim.state().x) / p.scale_r);
            sup = std::max(sup, (scaled - fluids[ii].at(t)).cwiseAbs().maxCoeff());
        }
        out[idx] = {sup, max_y};
    });

    bool ok = true;
    nlohmann::json per_initial = nlohmann::json::array();
    std::string brief;
    for (std::size_t ii = 0; ii < initials.size(); ++ii) {
        std::size_t sup_within = 0, y_within = 0;
        double sup_mean = 0.0, sup_max = 0.0;
        long long y_max = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto& o = out[ii * reps + rep];
            sup_within += o.sup <= sup_limit ? 1 : 0;
            y_within += static_cast<double>(o.max_abs_y) <= y_limit ? 1 : 0;
            sup_mean += o.sup / reps;
            sup_max = std::max(sup_max, o.sup);
            y_max = std::max(y_max, o.max_abs_y);
        }
        ok = ok && sup_within >= required && y_within >= required;
        per_initial.push_back({{"initial", {initials[ii].y, initials[ii].x}},
                               {"sup_within", sup_within},
                               {"mean_sup", sup_mean},
                               {"max_sup", sup_max},
                               {"abs_y_within", y_within},
                               {"max_abs_y", y_max}});
        res.details.push_back("initial (" + std::to_string(initials[ii].y) + ", " + std::to_string(initials[ii].x) +
                              "): sup mean " + num(sup_mean, 3) + " max " + num(sup_max, 3) + ", " +
                              std::to_string(sup_within) + "/20 <= 0.05; max |Y| " + std::to_string(y_max) + ", " +
                              std::to_string(y_within) + "/20 <= 100");
        brief += (ii ? "; " : "") + std::string("initial ") + std::to_string(ii + 1) + ": sup " +
                 std::to_string(sup_within) + "/20, |Y| " + std::to_string(y_within) + "/20";
    }
    res.pass = ok;
    res.measured = {{"per_initial", per_initial}};
    res.threshold = {{"sup_deviation", sup_limit},
                     {"deviation_from", dev_from},
                     {"max_abs_y", y_limit},
                     {"y_from", y_from},
                     {"required_within", required},
                     {"replications", reps}};
    res.brief = brief + " (need >= 18)";
    return res;
}

// ---------------------------------------------------------------------------------------------

CriterionResult reflection(const AcceptanceOptions& opt) {
    auto res = criterion(10, "reflection-oracle", "reflection");
    constexpr std::size_t budget = 10'000;
    struct Case {
        double r;
        long long y, x;
    };
    const std::vector<Case> cases = {{2, 0, 0},     {2, 10, 0},      {5, 0, 0},       {10, 0, 0},
                                     {10, 5, 0},    {10, -5, 3},     {100, 50, 0},    {100, -100, 200},
                                     {1000, 0, 0},  {1000, -1000, 2000}};
    bool ok = true;
    std::size_t total_lifts = 0;
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t i = 0; i < cases.size(); ++i) {
        ModelParams p = baseline();
        p.scale_r = cases[i].r;
        RandomStream rng(opt.seed, stream_id(10, i));
        SamplingSpec sampling;
        const double horizon = 1.5 * static_cast<double>(budget) / (p.lambda * p.scale_r);
        sampling.dt = horizon;
        sampling.record_events = true;
        sampling.event_budget = budget;
        const auto traj =
            simulate_b(make_state(cases[i].y, cases[i].x), p, ArrivalRate::constant(p.lambda), horizon, rng, sampling);
        const auto refl = reflect_representation(traj.events, traj.initial, p);
        const auto direct = direct_x_path(traj.events, traj.initial);
        std::size_t mismatches = 0, lifts = 0;
        long long prev_lift = 0;
        for (std::size_t k = 0; k < direct.size(); ++k) {
            if (refl.x[k] != direct[k]) ++mismatches;
            const long long lift = refl.x[k] - refl.z[k];
            if (lift > prev_lift) ++lifts;
            prev_lift = lift;
        }
        const bool full = traj.events.size() == budget && refl.x.size() == direct.size();
        const bool run_ok = full && mismatches == 0;
        ok = ok && run_ok;
        total_lifts += lifts;
        runs.push_back({{"r", cases[i].r},
                        {"initial", {cases[i].y, cases[i].x}},
                        {"events", traj.events.size()},
                        {"mismatches", mismatches},
                        {"reflection_steps", lifts},
                        {"pass", run_ok}});
        res.details.push_back("r=" + num(cases[i].r) + " (" + std::to_string(cases[i].y) + ", " +
                              std::to_string(cases[i].x) + "): " + std::to_string(traj.events.size()) +
                              " events, " + std::to_string(mismatches) + " mismatches, " + std::to_string(lifts) +
                              " reflection steps" + (run_ok ? "" : "  FAIL"));
    }
    res.pass = ok;
    res.measured = {{"runs", runs}, {"total_reflection_steps", total_lifts}};
    res.threshold = {{"mismatches", 0}, {"events_per_run", budget}};
    res.brief = std::to_string(cases.size()) + " runs x " + std::to_string(budget) + " events, exact match " +
                (ok ? "yes" : "no") + ", " + std::to_string(total_lifts) + " reflection steps exercised";
    return res;
}

// ---------------------------------------------------------------------------------------------

using SuiteFn = std::function<std::vector<CriterionResult>(const AcceptanceOptions&, std::optional<LongRun>&)>;

template <typename F>
SuiteFn single(F f) {
    return [f](const AcceptanceOptions& o, std::optional<LongRun>&) { return std::vector<CriterionResult>{f(o)}; };
}

const std::map<std::string, SuiteFn, std::less<>>& registry() {
    static const std::map<std::string, SuiteFn, std::less<>> table = {
        {"generator", single(generator_drift)},
        {"fluid-convergence", single(fluid_convergence)},
        {"fluid-properties", single(fluid_properties)},
        {"stationary-concentration",
         [](const AcceptanceOptions& o, std::optional<LongRun>& cache) {
             if (!cache) cache = long_run(o);
             return std::vector<CriterionResult>{stationary_concentration(*cache)};
         }},
        {"diffusion-stationary",
         [](const AcceptanceOptions& o, std::optional<LongRun>& cache) {
             if (!cache) cache = long_run(o);
             return std::vector<CriterionResult>{diffusion_stationary(*cache)};
         }},
        {"closed-form", single(closed_form)},
        {"sde-ode", single(sde_ode)},
        {"scheme-a", single(scheme_a)},
        {"time-varying", single(time_varying)},
        {"reflection", single(reflection)},
    };
    return table;
}

}  // namespace

bool SuiteReport::pass() const noexcept {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.pass; });
}

const std::vector<std::string>& acceptance_suites() {
    static const std::vector<std::string> names = {
        "generator",    "fluid-convergence", "fluid-properties", "stationary-concentration", "diffusion-stationary",
        "closed-form",  "sde-ode",           "scheme-a",         "time-varying",             "reflection",
    };
    return names;
}

std::vector<SuiteReport> run_acceptance(std::string_view suite, const AcceptanceOptions& options) {
    std::vector<std::string> selected;
    if (suite == "all") {
        selected = acceptance_suites();
    } else if (registry().count(suite)) {
        selected.emplace_back(suite);
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown acceptance suite '" + std::string(suite) + "'");
    }
    std::optional<LongRun> cache;
    std::vector<SuiteReport> reports;
    for (const auto& name : selected) {
        const auto t0 = Clock::now();
        SuiteReport rep;
        rep.suite = name;
        rep.criteria = registry().find(name)->second(options, cache);
        rep.seconds = seconds_since(t0);
        for (auto& c : rep.criteria)
            if (c.seconds == 0.0) c.seconds = rep.seconds;
        reports.push_back(std::move(rep));
    }
    return reports;
}

nlohmann::json to_json(const CriterionResult& r) {
    return {{"criterion", r.id},   {"name", r.name},           {"suite", r.suite},     {"pass", r.pass},
            {"measured", r.measured}, {"threshold", r.threshold}, {"seconds", r.seconds}};
}

nlohmann::json to_json(const std::vector<SuiteReport>& reports) {
    nlohmann::json suites = nlohmann::json::array();
    bool all = true;
    double total = 0.0;
    for (const auto& rep : reports) {
        nlohmann::json crit = nlohmann::json::array();
        for (const auto& c : rep.criteria) crit.push_back(to_json(c));
        suites.push_back({{"suite", rep.suite}, {"pass", rep.pass()}, {"seconds", rep.seconds}, {"criteria", crit}});
        all = all && rep.pass();
        total += rep.seconds;
    }
    return {{"pass", all}, {"seconds", total}, {"suites", suites}};
}

std::string summary_line(const CriterionResult& r) {
    return std::string(r.pass ? "PASS" : "FAIL") + "  [" + std::to_string(r.id) + "] " + r.name + ": " + r.brief +
           "  (" + num(r.seconds, 3) + " s)";
}

}  // namespace invitesim
