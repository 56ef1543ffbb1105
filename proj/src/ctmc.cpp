#include "invitesim/ctmc.hpp"

#include "invitesim/error.hpp"
#include "invitesim/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

namespace invitesim {

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
        case EventKind::Arrival: return "arrival";
        case EventKind::Acceptance: return "acceptance";
        case EventKind::Feedback: return "feedback";
        case EventKind::Rejection: return "rejection";
    }
    return "unknown";
}

namespace {

int sgn(long long v) noexcept { return (v > 0) - (v < 0); }

/// Feedback change of X for Scheme B, rule (iii).
long long feedback_dx(long long y, long long x) noexcept {
    if (x >= 1) return -sgn(y);
    return y < 0 ? 1 : 0;
}

}  // namespace

std::vector<Transition> transition_rates_b(const SystemState& s, const ModelParams& p, double big_lambda) {
    std::vector<Transition> out;
    out.reserve(3);
    if (big_lambda > 0.0) out.push_back({EventKind::Arrival, big_lambda, -1, p.gamma});
    if (s.x > 0) {
        const double x = static_cast<double>(s.x);
        out.push_back({EventKind::Acceptance, p.beta * x, +1, -std::min(p.gamma, x)});
    }
    if (s.y != 0) {
        out.push_back({EventKind::Feedback, p.epsilon * std::abs(static_cast<double>(s.y)), 0,
                       static_cast<double>(feedback_dx(s.y, s.x))});
    }
    return out;
}

std::vector<Transition> transition_rates_b(const SystemState& s, const ModelParams& p) {
    return transition_rates_b(s, p, p.big_lambda());
}

CtmcSimulator::CtmcSimulator(Scheme scheme, const ModelParams& params, const ArrivalRate& arrival,
                             const SystemState& initial, RandomStream& rng, double horizon,
                             std::optional<double> arrival_bound)
    : scheme_(scheme),
      params_(params),
      arrival_(arrival),
      rng_(rng),
      state_(initial),
      constant_arrival_(arrival.is_constant()),
      gamma_int_(static_cast<long long>(std::floor(params.gamma + 1e-12))) {
    validate_params(params_, scheme_);
    if (initial.x < 0) throw Error(ErrorCode::InvalidInitial, "X(0) must be >= 0");
    if (scheme_ == Scheme::A && !(initial.x_target >= 0.0))
        throw Error(ErrorCode::InvalidInitial, "X_target(0) must be >= 0");
    const double bound = arrival_bound ? *arrival_bound : arrival_.upper_bound(horizon);
    arrival_bound_ = bound * params_.scale_r;
    if (arrival_bound && constant_arrival_ && *arrival_bound != arrival_.base()) constant_arrival_ = false;
    schedule_next();
}

CtmcSimulator::Rates CtmcSimulator::current_rates() const noexcept {
    Rates r{};
    r.arrival = arrival_bound_;
    const double x = static_cast<double>(state_.x);
    r.acceptance = params_.beta * x;
    r.third = scheme_ == Scheme::B ? params_.epsilon * std::abs(static_cast<double>(state_.y))
                                   : params_.beta_tilde * x;
    r.total = r.arrival + r.acceptance + r.third;
    return r;
}

void CtmcSimulator::schedule_next() {
    const double total = current_rates().total;
    next_time_ = total > 0.0 ? state_.t + rng_.exponential(total) : std::numeric_limits<double>::infinity();
}

long long CtmcSimulator::gamma_jump() {
    if (!params_.randomized_rounding) return gamma_int_;
    const double frac = params_.gamma - std::floor(params_.gamma);
    return gamma_int_ + (frac > 0.0 && rng_.bernoulli(frac) ? 1 : 0);
}

bool CtmcSimulator::fire(EventRecord& rec) {
    const Rates r = current_rates();
    const double pick = rng_.uniform() * r.total;
    rec.t = state_.t;
    const long long x_before = state_.x;
    const long long y_before = state_.y;

    if (pick < r.arrival) {
        if (!constant_arrival_) {
            const double rate = arrival_(state_.t) * params_.scale_r;
            if (rate > arrival_bound_ * (1.0 + 1e-12))
                throw Error(ErrorCode::ThinningBoundViolated,
                            "arrival rate " + std::to_string(rate) + " exceeds declared bound " +
                                std::to_string(arrival_bound_) + " at t=" + std::to_string(state_.t));
            if (!(rng_.uniform() * arrival_bound_ < rate)) return false;
        }
        rec.kind = EventKind::Arrival;
        state_.y -= 1;
        if (scheme_ == Scheme::B) {
            state_.x += gamma_jump();
        } else {
            const double elapsed = state_.t - state_.last_y_change;
            state_.x_target = std::max(
                0.0, state_.x_target + params_.gamma - params_.epsilon * static_cast<double>(y_before) * elapsed);
            state_.last_y_change = state_.t;
        }
    } else if (pick < r.arrival + r.acceptance) {
        rec.kind = EventKind::Acceptance;
        state_.y += 1;
        if (scheme_ == Scheme::B) {
            state_.x -= std::min(gamma_jump(), state_.x);
        } else {
            state_.x -= 1;
            const double elapsed = state_.t - state_.last_y_change;
            state_.x_target = std::max(
                0.0, state_.x_target - params_.gamma - params_.epsilon * static_cast<double>(y_before) * elapsed);
            state_.last_y_change = state_.t;
        }
    } else if (scheme_ == Scheme::B) {
        rec.kind = EventKind::Feedback;
        state_.x += feedback_dx(state_.y, state_.x);
    } else {
        rec.kind = EventKind::Rejection;
        state_.x -= 1;
    }

    if (scheme_ == Scheme::A && static_cast<double>(state_.x) < state_.x_target)
        state_.x = static_cast<long long>(std::ceil(state_.x_target));

    rec.dy = static_cast<int>(state_.y - y_before);
    rec.dx = state_.x - x_before;
    return true;
}

namespace {

Trajectory run(Scheme scheme, const SystemState& initial, const ModelParams& params, const ArrivalRate& arrival,
               double horizon, RandomStream& rng, const SamplingSpec& sampling) {
    if (!(horizon > initial.t)) throw Error(ErrorCode::HorizonZero, "horizon must exceed the initial time");
    if (!(sampling.dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "sampling dt must be > 0");

    Trajectory traj;
    traj.scheme = scheme;
    traj.params = params;
    traj.arrival = arrival;
    traj.seed = rng.seed();
    traj.stream = rng.stream();
    traj.initial = initial;
    traj.horizon = horizon;
    if (scheme == Scheme::B) traj.initial.x_target = std::numeric_limits<double>::quiet_NaN();

    CtmcSimulator sim(scheme, params, arrival, initial, rng, horizon, sampling.arrival_bound);
    auto sink = [&](const EventRecord& rec) {
        if (!sampling.record_events) return;
        if (traj.events.size() < sampling.event_budget)
            traj.events.push_back(rec);
        else
            traj.events_truncated = true;
    };
    auto record = [&] {
        const auto& s = sim.state();
        traj.samples.push_back({s.t, s.y, s.x,
                                scheme == Scheme::A ? s.x_target : std::numeric_limits<double>::quiet_NaN()});
    };

    const auto steps = static_cast<std::size_t>(std::floor((horizon - initial.t) / sampling.dt + 1e-9));
    traj.samples.reserve(steps + 2);
    record();
    for (std::size_t k = 1; k <= steps; ++k) {
        sim.advance_to(initial.t + static_cast<double>(k) * sampling.dt, sink);
        record();
    }
    if (traj.samples.back().t < horizon) {
        sim.advance_to(horizon, sink);
        record();
    }
    traj.final_state = sim.state();
    traj.event_count = sim.event_count();
    return traj;
}

}  // namespace

Trajectory simulate_b(const SystemState& initial, const ModelParams& params, const ArrivalRate& arrival,
                      double horizon, RandomStream& rng, const SamplingSpec& sampling) {
    return run(Scheme::B, initial, params, arrival, horizon, rng, sampling);
}

Trajectory simulate_a(const SystemState& initial, const ModelParams& params, const ArrivalRate& arrival,
                      double horizon, RandomStream& rng, const SamplingSpec& sampling) {
    return run(Scheme::A, initial, params, arrival, horizon, rng, sampling);
}

Vec2 ScaledTrajectory::at(double t) const {
    if (samples.empty()) throw Error(ErrorCode::GridOutsideHorizon, "empty trajectory");
    if (t < samples.front().t - 1e-12 || t > horizon + 1e-12)
        throw Error(ErrorCode::GridOutsideHorizon, "t=" + std::to_string(t) + " outside trajectory");
    auto it = std::upper_bound(samples.begin(), samples.end(), t + 1e-12,
                               [](double v, const ScaledSample& s) { return v < s.t; });
    const auto& s = *std::prev(it == samples.begin() ? std::next(it) : it);
    return Vec2(s.y, s.x);
}

Vec2 fluid_scale_point(long long y, long long x, const ModelParams& p, bool centered) {
    const double shift = centered ? p.x_center() : 0.0;
    return Vec2(static_cast<double>(y) / p.scale_r, (static_cast<double>(x) - shift) / p.scale_r);
}

ScaledTrajectory fluid_scale(const Trajectory& traj, Centering centering) {
    const bool centered = centering == Centering::Auto ? traj.arrival.is_constant()
                                                       : centering == Centering::Centered;
    const auto& p = traj.params;
    const double shift = centered ? p.x_center() : 0.0;
    ScaledTrajectory out;
    out.centered = centered;
    out.horizon = traj.horizon;
    out.samples.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        out.samples.push_back({s.t, static_cast<double>(s.y) / p.scale_r,
                               (static_cast<double>(s.x) - shift) / p.scale_r, (s.x_target - shift) / p.scale_r});
    }
    return out;
}

Vec2 diffusion_scale_point(double y, double x, const ModelParams& p) {
    const double root = std::sqrt(p.scale_r);
    return Vec2(y / root, (x - p.x_center()) / root);
}

ScaledTrajectory diffusion_scale(const Trajectory& traj) {
    if (!traj.arrival.is_constant())
        throw Error(ErrorCode::ConfigInvalid, "diffusion scaling needs a constant arrival rate");
    const auto& p = traj.params;
    const double root = std::sqrt(p.scale_r);
    ScaledTrajectory out;
    out.centered = true;
    out.horizon = traj.horizon;
    out.samples.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        out.samples.push_back({s.t, static_cast<double>(s.y) / root, (static_cast<double>(s.x) - p.x_center()) / root,
                               (s.x_target - p.x_center()) / root});
    }
    return out;
}

ReflectedPath reflect_representation(const std::vector<EventRecord>& events, const SystemState& initial,
                                     const ModelParams& params) {
    if (!is_integer_gamma(params.gamma))
        throw Error(ErrorCode::NonIntegerGamma, "reflection replay needs integer gamma");
    const auto gamma = static_cast<long long>(std::llround(params.gamma));

    ReflectedPath out;
    out.z.reserve(events.size());
    out.x.reserve(events.size());
    long long y = initial.y;
    long long z = initial.x;
    long long running_min = z;
    for (std::size_t i = 0; i < events.size(); ++i) {
        const auto& e = events[i];
        auto mismatch = [&](const std::string& why) {
            return Error(ErrorCode::DriverMismatch, "event " + std::to_string(i) + " (" +
                                                        std::string(to_string(e.kind)) + "): " + why);
        };
        switch (e.kind) {
            case EventKind::Arrival:
                if (e.dy != -1) throw mismatch("arrival must move Y by -1");
                z += gamma;
                break;
            case EventKind::Acceptance:
                if (e.dy != 1) throw mismatch("acceptance must move Y by +1");
                z -= gamma;
                break;
            case EventKind::Feedback:
                if (e.dy != 0) throw mismatch("feedback must leave Y unchanged");
                if (y == 0) throw mismatch("feedback cannot fire while Y = 0");
                z += y < 0 ? 1 : -1;  // N3 while Y < 0, N4 while Y > 0
                break;
            case EventKind::Rejection:
                throw mismatch("rejections are not part of the stylized scheme");
        }
        y += e.dy;
        running_min = std::min(running_min, z);
        out.z.push_back(z);
        out.x.push_back(z + std::max(0LL, -running_min));
    }
    return out;
}

std::vector<long long> direct_x_path(const std::vector<EventRecord>& events, const SystemState& initial) {
    std::vector<long long> out;
    out.reserve(events.size());
    long long x = initial.x;
    for (const auto& e : events) {
        x += e.dx;
        out.push_back(x);
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    const bool with_target = traj.scheme == Scheme::A;
    os << (with_target ? "t,y,x,x_target\n" : "t,y,x\n");
    for (const auto& s : traj.samples) {
        os << format_number(s.t) << ',' << s.y << ',' << s.x;
        if (with_target) os << ',' << format_number(s.x_target);
        os << '\n';
    }
}

void write_event_log_jsonl(std::ostream& os, const Trajectory& traj) {
    for (const auto& e : traj.events) {
        os << "{\"t\":" << format_number(e.t) << ",\"kind\":\"" << to_string(e.kind) << "\",\"dy\":" << e.dy
           << ",\"dx\":" << e.dx << "}\n";
    }
}

}  // namespace invitesim
