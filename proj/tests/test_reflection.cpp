#include "invitesim/ctmc.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace invitesim;

namespace {

SystemState start(long long y, long long x) {
    SystemState s;
    s.y = y;
    s.x = x;
    s.x_target = static_cast<double>(x);
    return s;
}

}  // namespace

TEST_SUITE("reflection") {

TEST_CASE("acceptance truncated at the boundary equals reflection") {
    auto p = testing::figure_params();
    p.gamma = 3.0;
    const std::vector<EventRecord> events = {{0.1, EventKind::Acceptance, 1, -2}};
    const auto init = start(0, 2);
    const auto refl = reflect_representation(events, init, p);
    const auto direct = direct_x_path(events, init);
    CHECK(direct == std::vector<long long>{0});
    CHECK(refl.x == std::vector<long long>{0});
    CHECK(refl.z == std::vector<long long>{-1});
}

TEST_CASE("interior acceptance") {
    const auto p = testing::figure_params();
    const std::vector<EventRecord> events = {{0.1, EventKind::Acceptance, 1, -2}};
    const auto refl = reflect_representation(events, start(0, 5), p);
    CHECK(refl.x == std::vector<long long>{3});
    CHECK(direct_x_path(events, start(0, 5)) == std::vector<long long>{3});
}

TEST_CASE("null feedback at x = 0 is absorbed by the reflection") {
    const auto p = testing::figure_params();
    const std::vector<EventRecord> events = {{0.1, EventKind::Feedback, 0, 0},
                                             {0.2, EventKind::Arrival, -1, 2},
                                             {0.3, EventKind::Feedback, 0, -1}};
    const auto init = start(2, 0);
    const auto refl = reflect_representation(events, init, p);
    CHECK(refl.x == direct_x_path(events, init));
    CHECK(refl.x == std::vector<long long>{0, 2, 1});
}

TEST_CASE("inconsistent drivers") {
    const auto p = testing::figure_params();
    CHECK_ERROR(ErrorCode::DriverMismatch,
                reflect_representation({{0.1, EventKind::Arrival, 1, 2}}, start(0, 0), p));
    CHECK_ERROR(ErrorCode::DriverMismatch,
                reflect_representation({{0.1, EventKind::Feedback, 0, 1}}, start(0, 0), p));
    CHECK_ERROR(ErrorCode::DriverMismatch,
                reflect_representation({{0.1, EventKind::Rejection, 0, -1}}, start(0, 3), p));
    auto q = p;
    q.gamma = 2.5;
    CHECK_ERROR(ErrorCode::NonIntegerGamma, reflect_representation({}, start(0, 0), q));
}

TEST_CASE("recorded runs replay exactly") {
    for (double r : {1.0, 3.0, 30.0, 1000.0}) {
        for (long long gamma : {1, 2, 3}) {
            auto p = testing::figure_params(r);
            p.gamma = static_cast<double>(gamma);
            p.epsilon = 0.2 * gamma * gamma / 4.0;
            SamplingSpec s;
            s.dt = 1.0;
            s.record_events = true;
            s.event_budget = 10'000;
            RandomStream rng(31, static_cast<std::uint64_t>(gamma));
            const auto init = start(static_cast<long long>(r), 0);
            const auto traj = simulate_b(init, p, ArrivalRate::constant(1.0), 20'000.0 / r, rng, s);
            REQUIRE(traj.events.size() == 10'000);
            const auto refl = reflect_representation(traj.events, init, p);
            CHECK(refl.x == direct_x_path(traj.events, init));
        }
    }
}

}
