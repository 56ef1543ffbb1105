#include "invitesim/reference_fluid.hpp"

#include <boost/numeric/odeint.hpp>

#include <array>

namespace invitesim::reference {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

namespace {

template <typename Stepper, typename Pred>
double bisect_event(Stepper& stepper, double lo, double hi, Pred crossed) {
    State probe{};
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, probe);
        (crossed(probe) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace

ReferenceResult integrate_fluid(const Vec2& initial, const ModelParams& p, const std::vector<double>& times,
                                double tolerance) {
    const double floor_x = -p.lambda / p.beta;
    const double exit_y = p.gamma * p.lambda / p.epsilon;

    auto interior = [&](const State& u, State& du, double) {
        du[0] = p.beta * u[1];
        du[1] = -p.gamma * p.beta * u[1] - p.epsilon * u[0];
    };
    auto on_floor = [&](const State&, State& du, double) {
        du[0] = -p.lambda;
        du[1] = 0.0;
    };

    ReferenceResult out;
    out.states.reserve(times.size());
    if (times.empty()) return out;
    const double t_end = times.back();

    State u{initial(0), std::max(initial(1), floor_x)};
    double t = 0.0;
    bool boundary = u[1] <= floor_x && u[0] > exit_y;
    if (boundary) ++out.boundary_entries;
    std::size_t next = 0;
    auto emit_until = [&](auto& stepper, double limit) {
        State tmp{};
        while (next < times.size() && times[next] <= limit) {
            stepper.calc_state(times[next], tmp);
            out.states.emplace_back(tmp[0], tmp[1]);
            ++next;
        }
    };
    while (next < times.size() && times[next] <= t) {
        out.states.emplace_back(u[0], u[1]);
        ++next;
    }

    auto stepper = odeint::make_dense_output(tolerance, tolerance, odeint::runge_kutta_dopri5<State>());
    while (next < times.size() && t < t_end) {
        stepper.initialize(u, t, 1e-3);
        bool switched = false;
        while (!switched && next < times.size()) {
            const auto [t0, t1] = boundary ? stepper.do_step(on_floor) : stepper.do_step(interior);
            const State& end = stepper.current_state();
            if (!boundary && end[1] < floor_x) {
                const double tc = bisect_event(stepper, t0, t1, [&](const State& s) { return s[1] < floor_x; });
                emit_until(stepper, tc);
                State at{};
                stepper.calc_state(tc, at);
                u = {at[0], floor_x};
                t = tc;
                boundary = u[0] > exit_y;
                if (boundary) ++out.boundary_entries;
                switched = true;
            } else if (boundary && p.gamma * p.lambda - p.epsilon * end[0] > 0.0) {
                const double tc = bisect_event(stepper, t0, t1, [&](const State& s) { return s[0] < exit_y; });
                emit_until(stepper, tc);
                State at{};
                stepper.calc_state(tc, at);
                u = {exit_y, floor_x};
                t = tc;
                boundary = false;
                switched = true;
            } else {
                emit_until(stepper, t1);
                u = end;
                t = t1;
            }
        }
    }
    return out;
}

Vec2 integrate_linear(const Vec2& initial, const ModelParams& p, double t, double tolerance) {
    State u{initial(0), initial(1)};
    auto interior = [&](const State& s, State& du, double) {
        du[0] = p.beta * s[1];
        du[1] = -p.gamma * p.beta * s[1] - p.epsilon * s[0];
    };
    odeint::integrate_adaptive(odeint::make_controlled(tolerance, tolerance, odeint::runge_kutta_dopri5<State>()),
                               interior, u, 0.0, t, 1e-3);
    return Vec2(u[0], u[1]);
}

}  // namespace invitesim::reference
