#include "invitesim/fluid.hpp"

#include "invitesim/error.hpp"
#include "invitesim/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

namespace invitesim {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr int kMaxSegments = 16;

}  // namespace

FluidState interior_solution(const FluidState& initial, double dt, const SpectralData& spec) {
    const Vec2 alpha = star_coords(initial, spec);
    return alpha(0) * std::exp(-spec.nu1 * dt) * spec.v1 + alpha(1) * std::exp(-spec.nu2 * dt) * spec.v2;
}

std::optional<double> boundary_hit_time(const FluidState& initial, const ModelParams& params,
                                        const SpectralData& spec) {
    // gap(t) = x(t) + lambda / beta along the linear flow; x(t) = -(alpha1 e^{-nu1 t} + alpha2 e^{-nu2 t}).
    const double floor_gap = params.lambda / params.beta;
    const Vec2 alpha = star_coords(initial, spec);
    auto gap = [&](double t) {
        return floor_gap - alpha(0) * std::exp(-spec.nu1 * t) - alpha(1) * std::exp(-spec.nu2 * t);
    };
    const double gap0 = gap(0.0);
    const double slope0 = spec.nu1 * alpha(0) + spec.nu2 * alpha(1);
    if (gap0 <= kBoundaryTol * std::max(1.0, floor_gap) && slope0 < 0.0) return 0.0;

    // gap'(t) has at most one zero; past it gap is monotone toward lambda / beta > 0, so a
    // crossing can only happen before that extremum.
    if (alpha(0) == 0.0 || alpha(1) == 0.0) return std::nullopt;
    const double ratio = -spec.nu2 * alpha(1) / (spec.nu1 * alpha(0));
    if (!(ratio > 1.0)) return std::nullopt;
    const double t_ext = std::log(ratio) / (spec.nu2 - spec.nu1);
    if (gap(t_ext) > 0.0) return std::nullopt;

    // gap is monotone decreasing on [0, t_ext]; scan to skip a zero at t = 0 then bisect.
    const double step = std::min(1.0 / spec.nu2, t_ext) / 64.0;
    double lo = 0.0;
    double hi = t_ext;
    for (double t = step; t < t_ext; t += step) {
        if (gap(t) <= 0.0) {
            hi = t;
            break;
        }
        lo = t;
    }
    for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Vec2 FluidTrajectory::segment_state(const FluidSegment& seg, double t) const {
    const double local = t - seg.start;
    if (seg.kind == FluidSegment::Kind::Boundary)
        return Vec2(seg.y_start - params_.lambda * local, -params_.lambda / params_.beta);
    return seg.alpha(0) * std::exp(-spec_.nu1 * local) * spec_.v1 +
           seg.alpha(1) * std::exp(-spec_.nu2 * local) * spec_.v2;
}

const FluidSegment& FluidTrajectory::segment_at(double t) const {
    if (segments_.empty()) throw Error(ErrorCode::GridOutsideHorizon, "empty fluid trajectory");
    if (t < -1e-12 || t > horizon_ * (1.0 + 1e-12) + 1e-12)
        throw Error(ErrorCode::GridOutsideHorizon,
                    "t=" + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const FluidSegment& s) { return v < s.start; });
    return it == segments_.begin() ? segments_.front() : *std::prev(it);
}

Vec2 FluidTrajectory::state(double t) const { return segment_state(segment_at(t), t); }

std::size_t FluidTrajectory::boundary_segments() const noexcept {
    return static_cast<std::size_t>(std::count_if(segments_.begin(), segments_.end(), [](const FluidSegment& s) {
        return s.kind == FluidSegment::Kind::Boundary;
    }));
}

FluidTrajectory solve_fluid(const FluidState& initial, const ModelParams& params, double horizon) {
    validate_params(params, Scheme::A);
    if (!(horizon > 0.0)) throw Error(ErrorCode::HorizonZero, "fluid horizon must be > 0");
    const double floor_x = -params.lambda / params.beta;
    const double exit_y = params.gamma * params.lambda / params.epsilon;
    const double tol = kBoundaryTol * std::max(1.0, std::abs(floor_x));
    if (initial(1) < floor_x - tol)
        throw Error(ErrorCode::InvalidInitial, "initial x = " + std::to_string(initial(1)) + " is below -lambda/beta");

    FluidTrajectory traj(params, spectral_decompose(params), horizon);
    const auto& spec = traj.spectral();
    double t = 0.0;
    Vec2 s(initial(0), std::max(initial(1), floor_x));

    for (int guard = 0; guard < kMaxSegments && t < horizon; ++guard) {
        const bool on_boundary = s(1) - floor_x <= tol;
        if (on_boundary && s(0) > exit_y) {
            FluidSegment seg;
            seg.kind = FluidSegment::Kind::Boundary;
            seg.start = t;
            seg.duration = std::min((s(0) - exit_y) / params.lambda, horizon - t);
            seg.y_start = s(0);
            traj.push(seg);
            t = seg.end();
            s = Vec2(exit_y, floor_x);
            continue;
        }

        FluidSegment seg;
        seg.kind = FluidSegment::Kind::Interior;
        seg.start = t;
        seg.alpha = star_coords(s, spec);
        const auto hit = boundary_hit_time(s, params, spec);
        if (hit && *hit > 0.0 && t + *hit < horizon) {
            const Vec2 at_hit = interior_solution(s, *hit, spec);
            if (at_hit(0) > exit_y) {
                seg.duration = *hit;
                traj.push(seg);
                t += *hit;
                s = Vec2(at_hit(0), floor_x);
                continue;
            }
        }
        seg.duration = horizon - t;
        traj.push(seg);
        t = horizon;
    }
    return traj;
}

Vec2 TVFluidTrajectory::at(double t) const {
    if (samples.empty() || t < samples.front().t - 1e-12 || t > samples.back().t + 1e-12)
        throw Error(ErrorCode::GridOutsideHorizon, "t=" + std::to_string(t) + " outside time-varying fluid path");
    auto it = std::lower_bound(samples.begin(), samples.end(), t,
                               [](const TVFluidSample& s, double v) { return s.t < v; });
    if (it == samples.begin()) return Vec2(it->y, it->x);
    if (it == samples.end()) return Vec2(samples.back().y, samples.back().x);
    const auto& b = *it;
    const auto& a = *std::prev(it);
    const double w = (t - a.t) / (b.t - a.t);
    return Vec2(a.y + w * (b.y - a.y), a.x + w * (b.x - a.x));
}

namespace {

/// One RK4 step of length h from (t, u) with a fixed field.
template <typename Field>
Vec2 rk4_step(const Field& f, double t, const Vec2& u, double h) {
    const Vec2 k1 = f(t, u);
    const Vec2 k2 = f(t + 0.5 * h, u + 0.5 * h * k1);
    const Vec2 k3 = f(t + 0.5 * h, u + 0.5 * h * k2);
    const Vec2 k4 = f(t + h, u + h * k3);
    return u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Largest h in (0, h_max] prefix over which `stays(step(h))` holds, by bisection.
template <typename Step, typename Pred>
double locate_switch(const Step& step, const Pred& stays, double h_max) {
    double lo = 0.0;
    double hi = h_max;
    for (int i = 0; i < 100 && hi - lo > 1e-15 * std::max(1.0, h_max); ++i) {
        const double mid = 0.5 * (lo + hi);
        (stays(step(mid)) ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

TVFluidTrajectory solve_fluid_tv(const TVFluidState& initial, const ArrivalRate& arrival, const ModelParams& params,
                                 double horizon, double dt) {
    if (initial(1) < -1e-12) throw Error(ErrorCode::NegativeInitialX, "initial x must be >= 0");
    if (!(dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "dt must be > 0");
    if (!(horizon > 0.0)) throw Error(ErrorCode::HorizonZero, "horizon must be > 0");
    const double beta = params.beta;
    const double gamma = params.gamma;
    const double eps = params.epsilon;

    // Cut points: uniform grid plus the jumps of lambda.
    std::vector<double> cuts;
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    for (std::size_t k = 0; k <= n; ++k) cuts.push_back(std::min(static_cast<double>(k) * dt, horizon));
    for (double j : arrival.jumps_before(horizon)) cuts.push_back(j);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return b - a < 1e-13; }), cuts.end());

    TVFluidTrajectory out;
    out.horizon = horizon;
    out.samples.reserve(cuts.size());

    Vec2 u(initial(0), std::max(initial(1), 0.0));
    bool boundary = u(1) <= 0.0 && gamma * arrival(0.0) - eps * u(0) <= 0.0;
    out.samples.push_back({0.0, u(0), u(1), boundary});

    for (std::size_t k = 1; k < cuts.size(); ++k) {
        const double lo = cuts[k - 1];
        const double hi = cuts[k];
        // Evaluate lambda from the left inside [lo, hi] so a jump at hi is not seen early.
        const double hi_left = std::nextafter(hi, lo);
        auto lam = [&](double s) { return arrival(std::clamp(s, lo, hi_left)); };
        auto interior = [&](double s, const Vec2& v) {
            const double l = lam(s);
            return Vec2(beta * v(1) - l, gamma * l - gamma * beta * v(1) - eps * v(0));
        };
        auto on_floor = [&](double s, const Vec2&) { return Vec2(-lam(s), 0.0); };

        double t = lo;
        for (int pass = 0; pass < 4 && t < hi; ++pass) {
            const double h = hi - t;
            if (!boundary && u(1) <= 0.0 && gamma * lam(t) - eps * u(0) <= 0.0) boundary = true;
            if (boundary && gamma * lam(t) - eps * u(0) > 0.0) boundary = false;
            if (!boundary) {
                Vec2 next = rk4_step(interior, t, u, h);
                if (next(1) >= 0.0) {
                    u = next;
                    t = hi;
                    break;
                }
                const double hs = locate_switch([&](double s) { return rk4_step(interior, t, u, s); },
                                                [](const Vec2& v) { return v(1) >= 0.0; }, h);
                u = rk4_step(interior, t, u, hs);
                u(1) = 0.0;
                t += hs;
                boundary = gamma * lam(t) - eps * u(0) <= 0.0;
                if (!boundary) {
                    // grazing touch: the interior field points back inside
                    continue;
                }
            } else {
                Vec2 next = rk4_step(on_floor, t, u, h);
                if (gamma * lam(hi) - eps * next(0) <= 0.0) {
                    u = next;
                    t = hi;
                    break;
                }
                const double hs = locate_switch([&](double s) { return rk4_step(on_floor, t, u, s); },
                                                [&](const Vec2& v) { return gamma * lam(t) - eps * v(0) <= 0.0; },
                                                h);
                u = rk4_step(on_floor, t, u, hs);
                t += hs;
                boundary = false;
            }
        }
        if (t < hi) {
            // leftover from repeated switching inside one step; finish with the current mode
            u = boundary ? rk4_step(on_floor, t, u, hi - t) : rk4_step(interior, t, u, hi - t);
            u(1) = std::max(u(1), 0.0);
        }
        out.samples.push_back({hi, u(0), u(1), boundary});
    }
    return out;
}

DriftReport drift_check(const FluidTrajectory& traj, double grid_dt) {
    constexpr double h = 1e-6;
    const auto& spec = traj.spectral();
    DriftReport rep{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(),
                    traj.boundary_segments(),
                    0,
                    0,
                    0.0,
                    true};
    double prev_norm = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<std::size_t>(std::floor(traj.horizon() / grid_dt + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = std::min(static_cast<double>(k) * grid_dt, traj.horizon());
        const auto& seg = traj.segment_at(t);
        const double norm = star_norm(traj.segment_state(seg, t), spec);
        const double drift = (star_norm(traj.segment_state(seg, t + h), spec) -
                              star_norm(traj.segment_state(seg, t - h), spec)) /
                             (2.0 * h);
        rep.max_norm = std::max(rep.max_norm, norm);
        if (norm > prev_norm * (1.0 + 1e-12) + 1e-15) rep.norm_nonincreasing = false;
        prev_norm = norm;
        if (seg.kind == FluidSegment::Kind::Boundary) {
            ++rep.boundary_points;
            rep.max_boundary_drift = std::max(rep.max_boundary_drift, drift);
        } else if (norm > 1e-9) {
            ++rep.interior_points;
            rep.min_interior_decay_ratio = std::min(rep.min_interior_decay_ratio, -drift / norm);
        }
    }
    return rep;
}

void write_fluid_csv(std::ostream& os, const FluidTrajectory& traj, double dt) {
    os << "t,y,x,segment_kind\n";
    const auto steps = static_cast<std::size_t>(std::floor(traj.horizon() / dt + 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * dt;
        const auto& seg = traj.segment_at(t);
        const Vec2 s = traj.segment_state(seg, t);
        os << format_number(t) << ',' << format_number(s(0)) << ',' << format_number(s(1)) << ','
           << (seg.kind == FluidSegment::Kind::Boundary ? "boundary" : "interior") << '\n';
    }
}

void write_fluid_tv_csv(std::ostream& os, const TVFluidTrajectory& traj, std::size_t stride) {
    os << "t,y,x,segment_kind\n";
    stride = std::max<std::size_t>(stride, 1);
    for (std::size_t i = 0; i < traj.samples.size(); i += stride) {
        const auto& s = traj.samples[i];
        os << format_number(s.t) << ',' << format_number(s.y) << ',' << format_number(s.x) << ','
           << (s.on_boundary ? "boundary" : "interior") << '\n';
    }
}

nlohmann::json segments_json(const FluidTrajectory& traj) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : traj.segments()) {
        nlohmann::json j = {{"kind", s.kind == FluidSegment::Kind::Boundary ? "boundary" : "interior"},
                            {"start", s.start},
                            {"duration", s.duration}};
        if (s.kind == FluidSegment::Kind::Boundary)
            j["y_start"] = s.y_start;
        else
            j["alpha"] = {s.alpha(0), s.alpha(1)};
        segs.push_back(j);
    }
    const auto& spec = traj.spectral();
    return {{"horizon", traj.horizon()},
            {"nu1", spec.nu1},
            {"nu2", spec.nu2},
            {"boundary_segments", traj.boundary_segments()},
            {"segments", segs}};
}

}  // namespace invitesim
