#include "invitesim/stats.hpp"

#include "invitesim/diffusion.hpp"
#include "invitesim/error.hpp"
#include "invitesim/io.hpp"
#include "invitesim/parallel.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace invitesim {

Curve as_curve(const ScaledTrajectory& traj) {
    if (traj.samples.empty()) throw Error(ErrorCode::GridOutsideHorizon, "empty trajectory");
    return {traj.samples.front().t, traj.horizon, [&traj](double t) { return traj.at(t); }};
}

Curve as_curve(const FluidTrajectory& traj) {
    return {0.0, traj.horizon(), [&traj](double t) { return traj.state(t); }};
}

Curve as_curve(const TVFluidTrajectory& traj) {
    if (traj.samples.empty()) throw Error(ErrorCode::GridOutsideHorizon, "empty fluid path");
    return {traj.samples.front().t, traj.samples.back().t, [&traj](double t) { return traj.at(t); }};
}

std::vector<double> TimeGrid::points() const {
    std::vector<double> out;
    if (!(dt > 0.0) || t1 < t0) return out;
    const auto n = static_cast<std::size_t>(std::floor((t1 - t0) / dt + 1e-9));
    out.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) out.push_back(t0 + static_cast<double>(k) * dt);
    return out;
}

DeviationReport sup_deviation(const Curve& a, const Curve& b, const TimeGrid& grid) {
    const double lo = std::max(a.t_begin, b.t_begin);
    const double hi = std::min(a.t_end, b.t_end);
    if (grid.t0 < lo - 1e-9 || grid.t1 > hi + 1e-9 || !(grid.dt > 0.0))
        throw Error(ErrorCode::GridOutsideHorizon, "grid [" + std::to_string(grid.t0) + ", " + std::to_string(grid.t1) +
                                                       "] not covered by both paths [" + std::to_string(lo) + ", " +
                                                       std::to_string(hi) + "]");
    DeviationReport rep;
    rep.grid = grid;
    rep.t_at_sup = grid.t0;
    for (double t : grid.points()) {
        const Vec2 d = (a.eval(t) - b.eval(t)).cwiseAbs();
        rep.sup_y = std::max(rep.sup_y, d(0));
        rep.sup_x = std::max(rep.sup_x, d(1));
        const double m = d.maxCoeff();
        if (m > rep.sup) {
            rep.sup = m;
            rep.t_at_sup = t;
        }
    }
    return rep;
}

TimeSeries to_series(const ScaledTrajectory& traj) {
    TimeSeries s;
    s.t.reserve(traj.samples.size());
    s.value.reserve(traj.samples.size());
    for (const auto& p : traj.samples) {
        s.t.push_back(p.t);
        s.value.emplace_back(p.y, p.x);
    }
    s.t_end = traj.horizon;
    return s;
}

namespace {

/// Time-weighted power sums of shifted values inside one window.
struct Moments {
    double w = 0.0;
    std::array<double, 5> y{};  // sum w d^k, k = 0 unused
    double x1 = 0.0;
    double x2 = 0.0;
    double xy = 0.0;

    void add(double weight, double dy, double dx) {
        w += weight;
        double p = weight;
        for (int k = 1; k <= 4; ++k) {
            p *= dy;
            y[static_cast<std::size_t>(k)] += p;
        }
        x1 += weight * dx;
        x2 += weight * dx * dx;
        xy += weight * dx * dy;
    }
    void merge(const Moments& o) {
        w += o.w;
        for (std::size_t k = 1; k <= 4; ++k) y[k] += o.y[k];
        x1 += o.x1;
        x2 += o.x2;
        xy += o.xy;
    }
};

struct Derived {
    Vec2 mean;
    Mat2 cov;
    double skew;
    double kurt;
};

Derived derive(const Moments& m, const Vec2& shift) {
    const double my = m.y[1] / m.w;
    const double mx = m.x1 / m.w;
    const double e2 = m.y[2] / m.w;
    const double e3 = m.y[3] / m.w;
    const double e4 = m.y[4] / m.w;
    const double c2 = std::max(e2 - my * my, 0.0);
    const double c3 = e3 - 3.0 * my * e2 + 2.0 * my * my * my;
    const double c4 = e4 - 4.0 * my * e3 + 6.0 * my * my * e2 - 3.0 * my * my * my * my;
    Derived d;
    d.mean = Vec2(my + shift(0), mx + shift(1));
    d.cov(0, 0) = c2;
    d.cov(1, 1) = std::max(m.x2 / m.w - mx * mx, 0.0);
    d.cov(0, 1) = d.cov(1, 0) = m.xy / m.w - mx * my;
    const double tiny = 1e-300;
    d.skew = c2 > tiny ? c3 / std::pow(c2, 1.5) : 0.0;
    d.kurt = c2 > tiny ? c4 / (c2 * c2) - 3.0 : 0.0;
    return d;
}

double half_width(const std::vector<double>& v, double tq) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return tq * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

}  // namespace

StationaryEstimate batch_means(const TimeSeries& series, double burn_in, std::size_t n_batches) {
    if (n_batches < 10) throw Error(ErrorCode::InsufficientData, "need at least 10 batches");
    if (series.t.empty() || series.t.size() != series.value.size())
        throw Error(ErrorCode::InsufficientData, "empty or malformed series");
    const double start = std::max(burn_in, series.t.front());
    if (!(series.t_end > start)) throw Error(ErrorCode::InsufficientData, "series ends before the burn-in");

    const double len = (series.t_end - start) / static_cast<double>(n_batches);
    const Vec2 shift = series.value.front();
    std::vector<Moments> batches(n_batches);

    for (std::size_t i = 0; i < series.t.size(); ++i) {
        double a = std::max(series.t[i], start);
        const double b = i + 1 < series.t.size() ? series.t[i + 1] : series.t_end;
        if (!(b > a)) continue;
        const Vec2 d = series.value[i] - shift;
        while (a < b) {
            auto k = static_cast<std::size_t>((a - start) / len);
            k = std::min(k, n_batches - 1);
            const double batch_end = k + 1 == n_batches ? series.t_end : start + static_cast<double>(k + 1) * len;
            const double piece_end = std::min(b, batch_end);
            if (piece_end <= a) {
                // floating-point edge at a batch boundary
                if (k + 1 == n_batches) break;
                a = batch_end;
                continue;
            }
            batches[k].add(piece_end - a, d(0), d(1));
            a = piece_end;
        }
    }

    Moments pooled;
    std::vector<Derived> per;
    per.reserve(n_batches);
    for (const auto& m : batches) {
        if (!(m.w > 0.0)) throw Error(ErrorCode::InsufficientData, "a batch received no data");
        pooled.merge(m);
        per.push_back(derive(m, shift));
    }

    const Derived all = derive(pooled, shift);
    StationaryEstimate est;
    est.mean = all.mean;
    est.cov = all.cov;
    est.skew_y = all.skew;
    est.excess_kurtosis_y = all.kurt;
    est.batches = n_batches;
    est.batch_length = len;
    est.burn_in = burn_in;

    const boost::math::students_t dist(static_cast<double>(n_batches - 1));
    const double tq = boost::math::quantile(dist, 0.975);
    auto collect = [&](auto get) {
        std::vector<double> v;
        v.reserve(per.size());
        for (const auto& d : per) v.push_back(get(d));
        return half_width(v, tq);
    };
    est.mean_half_width(0) = collect([](const Derived& d) { return d.mean(0); });
    est.mean_half_width(1) = collect([](const Derived& d) { return d.mean(1); });
    est.cov_half_width(0, 0) = collect([](const Derived& d) { return d.cov(0, 0); });
    est.cov_half_width(1, 1) = collect([](const Derived& d) { return d.cov(1, 1); });
    est.cov_half_width(0, 1) = est.cov_half_width(1, 0) = collect([](const Derived& d) { return d.cov(0, 1); });
    est.skew_half_width = collect([](const Derived& d) { return d.skew; });
    est.kurtosis_half_width = collect([](const Derived& d) { return d.kurt; });
    return est;
}

StationaryEstimate stationary_moments(const Trajectory& traj, double burn_in, std::size_t n_batches) {
    return batch_means(to_series(diffusion_scale(traj)), burn_in, n_batches);
}

GaussianReport gaussian_check(const StationaryEstimate& est, const ModelParams& params, const GaussianTolerances& tol) {
    const boost::math::students_t dist(static_cast<double>(std::max<std::size_t>(est.batches, 2) - 1));
    const double tq = boost::math::quantile(dist, 0.975);
    const Mat2 ref = stationary_covariance(params);

    GaussianReport rep;
    rep.scale_r = params.scale_r;
    rep.pre_asymptotic = params.scale_r < 100.0;
    auto add = [&](std::string name, double e, double r, double hw, double band) {
        const double se = hw / tq;
        const double diff = e - r;
        const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff));
        rep.entries.push_back({std::move(name), e, r, hw, z, band, std::abs(diff) <= band});
    };
    add("mean_y", est.mean(0), 0.0, est.mean_half_width(0), tol.mean_abs + est.mean_half_width(0));
    add("mean_x", est.mean(1), 0.0, est.mean_half_width(1), tol.mean_abs + est.mean_half_width(1));
    const auto cov_band = [&](int i, int j) {
        return tol.cov_rel * std::abs(ref(i, j)) + (tol.cov_ci_widening ? est.cov_half_width(i, j) : 0.0);
    };
    add("var_y", est.cov(0, 0), ref(0, 0), est.cov_half_width(0, 0), cov_band(0, 0));
    add("cov_yx", est.cov(0, 1), ref(0, 1), est.cov_half_width(0, 1), cov_band(0, 1));
    add("var_x", est.cov(1, 1), ref(1, 1), est.cov_half_width(1, 1), cov_band(1, 1));
    add("skew_y", est.skew_y, 0.0, est.skew_half_width, tol.skew + est.skew_half_width);
    add("excess_kurtosis_y", est.excess_kurtosis_y, 0.0, est.kurtosis_half_width,
        tol.excess_kurtosis + est.kurtosis_half_width);
    rep.pass = std::all_of(rep.entries.begin(), rep.entries.end(), [](const GaussianEntry& e) { return e.pass; });
    return rep;
}

SystemState ctmc_initial_from_fluid(const FluidState& fluid, const ModelParams& p) {
    SystemState s;
    s.y = std::llround(fluid(0) * p.scale_r);
    s.x = std::max(0LL, std::llround(fluid(1) * p.scale_r + p.x_center()));
    return s;
}

SweepResult scale_sweep(const std::vector<double>& r_list, const std::vector<FluidState>& initials,
                        const ModelParams& base, const SweepOptions& opt) {
    const std::size_t per_r = initials.size() * opt.replications;
    std::vector<double> devs(r_list.size() * per_r, 0.0);
    parallel_for(devs.size(), opt.workers, [&](std::size_t task) {
        const std::size_t ri = task / per_r;
        const std::size_t within = task % per_r;
        const std::size_t ii = within / opt.replications;
        const std::size_t rep = within % opt.replications;
        ModelParams p = base;
        p.scale_r = r_list[ri];
        RandomStream rng(opt.seed, (static_cast<std::uint64_t>(ii) << 20) | rep);
        SamplingSpec sampling;
        sampling.dt = opt.sample_dt;
        const SystemState start = ctmc_initial_from_fluid(initials[ii], p);
        const auto traj = simulate_b(start, p, ArrivalRate::constant(p.lambda), opt.horizon, rng, sampling);
        const auto scaled = fluid_scale(traj, Centering::Centered);
        const auto fluid = solve_fluid(fluid_scale_point(start.y, start.x, p), p, opt.horizon);
        devs[task] = sup_deviation(as_curve(scaled), as_curve(fluid), {0.0, opt.horizon, opt.grid_dt}).sup;
    });

    SweepResult out;
    for (std::size_t ri = 0; ri < r_list.size(); ++ri) {
        const auto first = devs.begin() + static_cast<std::ptrdiff_t>(ri * per_r);
        const std::vector<double> v(first, first + static_cast<std::ptrdiff_t>(per_r));
        const double n = static_cast<double>(v.size());
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
        double sd = std::numeric_limits<double>::quiet_NaN();
        if (v.size() >= 2) {
            double ss = 0.0;
            for (double d : v) ss += (d - mean) * (d - mean);
            sd = std::sqrt(ss / (n - 1.0));
        }
        out.rows.push_back({r_list[ri], mean, sd, v.size()});
    }
    out.monotone_decreasing = true;
    for (std::size_t i = 1; i < out.rows.size(); ++i)
        if (!(out.rows[i].mean_dev < out.rows[i - 1].mean_dev)) out.monotone_decreasing = false;
    if (out.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(out.rows.size());
        for (const auto& row : out.rows) {
            const double lx = std::log(row.r), ly = std::log(row.mean_dev);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        out.loglog_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    return out;
}

nlohmann::json to_json(const DeviationReport& rep) {
    return {{"sup", rep.sup},
            {"t_at_sup", rep.t_at_sup},
            {"sup_y", rep.sup_y},
            {"sup_x", rep.sup_x},
            {"grid", {{"t0", rep.grid.t0}, {"t1", rep.grid.t1}, {"dt", rep.grid.dt}}}};
}

nlohmann::json to_json(const StationaryEstimate& est) {
    return {{"mean", {est.mean(0), est.mean(1)}},
            {"mean_half_width", {est.mean_half_width(0), est.mean_half_width(1)}},
            {"cov", {{est.cov(0, 0), est.cov(0, 1)}, {est.cov(1, 0), est.cov(1, 1)}}},
            {"cov_half_width",
             {{est.cov_half_width(0, 0), est.cov_half_width(0, 1)}, {est.cov_half_width(1, 0), est.cov_half_width(1, 1)}}},
            {"skew_y", est.skew_y},
            {"skew_half_width", est.skew_half_width},
            {"excess_kurtosis_y", est.excess_kurtosis_y},
            {"kurtosis_half_width", est.kurtosis_half_width},
            {"batches", est.batches},
            {"batch_length", est.batch_length},
            {"burn_in", est.burn_in}};
}

nlohmann::json to_json(const GaussianReport& rep) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : rep.entries) {
        entries.push_back({{"name", e.name},
                           {"estimate", e.estimate},
                           {"reference", e.reference},
                           {"half_width", e.half_width},
                           {"z", std::isfinite(e.z_score) ? nlohmann::json(e.z_score) : nlohmann::json(nullptr)},
                           {"tolerance", e.tolerance},
                           {"pass", e.pass}});
    }
    return {{"pass", rep.pass}, {"scale_r", rep.scale_r}, {"pre_asymptotic", rep.pre_asymptotic}, {"entries", entries}};
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
    os << "r,mean_dev,std_dev,n\n";
    for (const auto& row : sweep.rows) {
        os << format_number(row.r) << ',' << format_number(row.mean_dev) << ',' << format_number(row.std_dev) << ','
           << row.n << '\n';
    }
}

}  // namespace invitesim
