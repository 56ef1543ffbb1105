#pragma once

#include "invitesim/params.hpp"
#include "invitesim/random.hpp"
#include "invitesim/spectral.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace invitesim {

/// Y = Q_a - Q_c carries both queues (non-idling), X counts pending invitations.
/// x_target and last_y_change are only meaningful for Scheme A.
struct SystemState {
    double t = 0.0;
    long long y = 0;
    long long x = 0;
    double x_target = 0.0;
    double last_y_change = 0.0;

    [[nodiscard]] long long agent_queue() const noexcept { return y > 0 ? y : 0; }
    [[nodiscard]] long long customer_queue() const noexcept { return y < 0 ? -y : 0; }
};

enum class EventKind { Arrival, Acceptance, Feedback, Rejection };
std::string_view to_string(EventKind kind) noexcept;

/// One candidate event; dx is the expected X change (exact for integer gamma).
struct Transition {
    EventKind kind;
    double rate;
    int dy;
    double dx;
};

/// Scheme B rates in `state` with total arrival rate `big_lambda`. Zero-rate events are omitted.
std::vector<Transition> transition_rates_b(const SystemState& state, const ModelParams& params,
                                           double big_lambda);
/// Same, with the constant arrival rate lambda * r.
std::vector<Transition> transition_rates_b(const SystemState& state, const ModelParams& params);

struct SamplingSpec {
    /// Grid spacing in model time; samples hold the state in force at each grid time.
    double dt = 0.01;
    bool record_events = false;
    std::size_t event_budget = 1'000'000;
    /// Dominating rate for thinning, in fluid units (multiplied by r). Unset: derived from the arrival function.
    std::optional<double> arrival_bound;
};

struct Sample {
    double t;
    long long y;
    long long x;
    double x_target;  ///< NaN for Scheme B
};

struct EventRecord {
    double t;
    EventKind kind;
    int dy;
    long long dx;
};

struct Trajectory {
    Scheme scheme = Scheme::B;
    ModelParams params;
    ArrivalRate arrival = ArrivalRate::constant(1.0);
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    SystemState initial;
    SystemState final_state;
    double horizon = 0.0;
    std::vector<Sample> samples;
    std::vector<EventRecord> events;
    bool events_truncated = false;
    std::size_t event_count = 0;
};

/// Event-by-event simulator for both schemes. Holds the pending event time across
/// calls, so splitting a run into several advance_to() calls does not change the path.
class CtmcSimulator {
public:
    CtmcSimulator(Scheme scheme, const ModelParams& params, const ArrivalRate& arrival,
                  const SystemState& initial, RandomStream& rng, double horizon,
                  std::optional<double> arrival_bound = std::nullopt);

    /// Runs all events with time <= until. Calls sink(record) for every realized event.
    template <typename Sink>
    void advance_to(double until, Sink&& sink);
    void advance_to(double until) {
        advance_to(until, [](const EventRecord&) {});
    }

    [[nodiscard]] const SystemState& state() const noexcept { return state_; }
    [[nodiscard]] std::size_t event_count() const noexcept { return events_; }

private:
    struct Rates {
        double arrival;
        double acceptance;
        double third;  ///< feedback (B) or rejection (A)
        double total;
    };

    [[nodiscard]] Rates current_rates() const noexcept;
    void schedule_next();
    /// Applies one candidate event at next_time_; returns false for a thinned-out arrival.
    bool fire(EventRecord& record);
    long long gamma_jump();

    Scheme scheme_;
    ModelParams params_;
    ArrivalRate arrival_;
    RandomStream& rng_;
    SystemState state_;
    double arrival_bound_;  ///< unscaled, i.e. already multiplied by r
    bool constant_arrival_;
    long long gamma_int_;
    double next_time_ = 0.0;
    std::size_t events_ = 0;
};

template <typename Sink>
void CtmcSimulator::advance_to(double until, Sink&& sink) {
    while (next_time_ <= until) {
        state_.t = next_time_;
        EventRecord rec{};
        if (fire(rec)) {
            ++events_;
            sink(rec);
        }
        schedule_next();
    }
    state_.t = until;
}

/// Simulates the stylized scheme (X equals its target) on [initial.t, horizon].
Trajectory simulate_b(const SystemState& initial, const ModelParams& params, const ArrivalRate& arrival,
                      double horizon, RandomStream& rng, const SamplingSpec& sampling = {});

/// Simulates the practical scheme with a real-valued target and ceiling replenishment.
Trajectory simulate_a(const SystemState& initial, const ModelParams& params, const ArrivalRate& arrival,
                      double horizon, RandomStream& rng, const SamplingSpec& sampling = {});

enum class Centering { Auto, Centered, Uncentered };

struct ScaledSample {
    double t;
    double y;
    double x;
    double x_target;  ///< NaN when absent
};

/// Scaled path; values are held constant between sample times.
struct ScaledTrajectory {
    std::vector<ScaledSample> samples;
    bool centered = true;
    double horizon = 0.0;

    /// Sample-and-hold value at t.
    [[nodiscard]] Vec2 at(double t) const;
};

/// (y / r, (x - lambda r / beta) / r) when centered, (y / r, x / r) otherwise.
/// Auto centers constant-rate runs and leaves time-varying runs uncentered.
ScaledTrajectory fluid_scale(const Trajectory& traj, Centering centering = Centering::Auto);
Vec2 fluid_scale_point(long long y, long long x, const ModelParams& params, bool centered = true);

/// (y, x - lambda r / beta) / sqrt(r); needs a constant arrival rate.
ScaledTrajectory diffusion_scale(const Trajectory& traj);
Vec2 diffusion_scale_point(double y, double x, const ModelParams& params);

/// X path rebuilt from driver counts: Z = X(0) + gamma N1 - gamma N2 + N3 - N4 and
/// X = Z + max(0, -min Z). N3/N4 are feedback events while Y < 0 / Y > 0.
struct ReflectedPath {
    std::vector<long long> z;  ///< free path after each event
    std::vector<long long> x;  ///< reflected path after each event
};
ReflectedPath reflect_representation(const std::vector<EventRecord>& events, const SystemState& initial,
                                     const ModelParams& params);

/// Direct X after each event, i.e. the running sum of the logged dx.
std::vector<long long> direct_x_path(const std::vector<EventRecord>& events, const SystemState& initial);

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
void write_event_log_jsonl(std::ostream& os, const Trajectory& traj);

}  // namespace invitesim
