#include "invitesim/ctmc.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace invitesim;

namespace {

SystemState at(long long y, long long x, double x_target = -1.0) {
    SystemState s;
    s.y = y;
    s.x = x;
    s.x_target = x_target < 0.0 ? static_cast<double>(x) : x_target;
    return s;
}

const Transition* find(const std::vector<Transition>& ts, EventKind k) {
    auto it = std::find_if(ts.begin(), ts.end(), [&](const Transition& t) { return t.kind == k; });
    return it == ts.end() ? nullptr : &*it;
}

SamplingSpec with_events(std::size_t budget = 1'000'000) {
    SamplingSpec s;
    s.record_events = true;
    s.event_budget = budget;
    return s;
}

}  // namespace

TEST_SUITE("ctmc") {

TEST_CASE("rates at the origin: arrival only") {
    const auto ts = transition_rates_b(at(0, 0), testing::figure_params());
    REQUIRE(ts.size() == 1);
    CHECK(ts[0].kind == EventKind::Arrival);
    CHECK(ts[0].rate == 1000.0);
    CHECK(ts[0].dy == -1);
    CHECK(ts[0].dx == 2.0);
}

TEST_CASE("rates in the interior") {
    const auto ts = transition_rates_b(at(2, 5), testing::figure_params());
    REQUIRE(ts.size() == 3);
    const auto* a = find(ts, EventKind::Arrival);
    const auto* c = find(ts, EventKind::Acceptance);
    const auto* f = find(ts, EventKind::Feedback);
    REQUIRE((a && c && f));
    CHECK(a->rate == 1000.0);
    CHECK(c->rate == 5.0);
    CHECK(c->dy == 1);
    CHECK(c->dx == -2.0);
    CHECK(f->rate == doctest::Approx(0.4));
    CHECK(f->dy == 0);
    CHECK(f->dx == -1.0);
}

TEST_CASE("feedback at x = 0") {
    const auto p = testing::figure_params();
    const auto neg = transition_rates_b(at(-3, 0), p);
    REQUIRE(neg.size() == 2);
    const auto* f = find(neg, EventKind::Feedback);
    REQUIRE(f);
    CHECK(f->rate == doctest::Approx(0.6));
    CHECK(f->dx == 1.0);
    const auto pos = transition_rates_b(at(3, 0), p);
    const auto* g = find(pos, EventKind::Feedback);
    REQUIRE(g);
    CHECK(g->dx == 0.0);
    // acceptance truncated at the boundary
    const auto one = transition_rates_b(at(0, 1), p);
    CHECK(find(one, EventKind::Acceptance)->dx == -1.0);
}

TEST_CASE("first event from the origin is an Exp(1000) arrival") {
    const auto p = testing::figure_params();
    double sum = 0.0;
    constexpr int n = 4000;
    for (int i = 0; i < n; ++i) {
        RandomStream rng(3, static_cast<std::uint64_t>(i));
        const auto traj = simulate_b(at(0, 0), p, ArrivalRate::constant(1.0), 0.05, rng, with_events(1));
        REQUIRE(traj.events.size() == 1);
        CHECK(traj.events[0].kind == EventKind::Arrival);
        CHECK(traj.events[0].dy == -1);
        CHECK(traj.events[0].dx == 2);
        sum += traj.events[0].t;
    }
    const double mean = sum / n;
    // Exp(1000): mean 1e-3, standard error 1e-3 / sqrt(n)
    CHECK(std::abs(mean - 1e-3) < 4.0 * 1e-3 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("one-step drift from a frozen interior state") {
    const auto p = testing::figure_params();
    constexpr double dt = 1e-4;
    constexpr int n = 100'000;
    RandomStream rng(17);
    double sy = 0, sy2 = 0;
    for (int i = 0; i < n; ++i) {
        CtmcSimulator sim(Scheme::B, p, ArrivalRate::constant(1.0), at(2, 5), rng, dt);
        sim.advance_to(dt);
        const double d = static_cast<double>(sim.state().y - 2);
        sy += d;
        sy2 += d * d;
    }
    const double mean = sy / n;
    const double se = std::sqrt((sy2 / n - mean * mean) / n);
    CHECK(std::abs(mean - (p.beta * 5 - 1000.0) * dt) <= 3.0 * se);
}

TEST_CASE("X stays nonnegative and jumps follow the rules") {
    for (double r : {1.0, 5.0, 50.0}) {
        auto p = testing::figure_params(r);
        for (std::uint64_t s = 0; s < 5; ++s) {
            RandomStream rng(99, s);
            const auto traj = simulate_b(at(3, 0), p, ArrivalRate::constant(1.0), 2000.0 / r, rng, with_events(20'000));
            long long y = 3, x = 0;
            for (const auto& e : traj.events) {
                switch (e.kind) {
                    case EventKind::Arrival:
                        CHECK(e.dx == 2);
                        break;
                    case EventKind::Acceptance:
                        CHECK(e.dx == -std::min<long long>(2, x));
                        break;
                    case EventKind::Feedback:
                        CHECK(e.dx == (y < 0 ? 1 : (x >= 1 ? -1 : 0)));
                        break;
                    case EventKind::Rejection:
                        FAIL("rejection in scheme B");
                }
                y += e.dy;
                x += e.dx;
                REQUIRE(x >= 0);
            }
        }
    }
}

TEST_CASE("identical seeds give identical trajectories") {
    const auto p = testing::figure_params(100.0);
    RandomStream a(42, 3), b(42, 3), c(42, 4);
    const auto ta = simulate_b(at(0, 0), p, ArrivalRate::constant(1.0), 10.0, a);
    const auto tb = simulate_b(at(0, 0), p, ArrivalRate::constant(1.0), 10.0, b);
    const auto tc = simulate_b(at(0, 0), p, ArrivalRate::constant(1.0), 10.0, c);
    REQUIRE(ta.samples.size() == tb.samples.size());
    bool same = true, differs = false;
    for (std::size_t i = 0; i < ta.samples.size(); ++i) {
        same = same && ta.samples[i].y == tb.samples[i].y && ta.samples[i].x == tb.samples[i].x;
        differs = differs || ta.samples[i].y != tc.samples[i].y;
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("split advance gives the same path") {
    const auto p = testing::figure_params(100.0);
    RandomStream a(8), b(8);
    CtmcSimulator one(Scheme::B, p, ArrivalRate::constant(1.0), at(0, 100), a, 5.0);
    CtmcSimulator two(Scheme::B, p, ArrivalRate::constant(1.0), at(0, 100), b, 5.0);
    one.advance_to(5.0);
    for (int k = 1; k <= 50; ++k) two.advance_to(0.1 * k);
    CHECK(one.state().y == two.state().y);
    CHECK(one.state().x == two.state().x);
    CHECK(one.event_count() == two.event_count());
}

TEST_CASE("sampling grid and horizon") {
    const auto p = testing::figure_params(10.0);
    RandomStream rng(1);
    SamplingSpec s;
    s.dt = 0.25;
    const auto traj = simulate_b(at(0, 10), p, ArrivalRate::constant(1.0), 2.0, rng, s);
    REQUIRE(traj.samples.size() == 9);
    for (std::size_t i = 1; i < traj.samples.size(); ++i) CHECK(traj.samples[i].t > traj.samples[i - 1].t);
    CHECK(traj.samples.back().t == 2.0);
    CHECK(traj.seed == 1);
    RandomStream rng2(1);
    CHECK_ERROR(ErrorCode::HorizonZero, simulate_b(at(0, 10), p, ArrivalRate::constant(1.0), 0.0, rng2));
}

TEST_CASE("thinning reproduces piecewise arrival counts") {
    auto p = testing::figure_params(100.0);
    const auto arrival = ArrivalRate::piecewise({10.0}, {1.0, 3.0});
    std::array<double, 2> count{};
    constexpr int runs = 40;
    for (int i = 0; i < runs; ++i) {
        RandomStream rng(5, static_cast<std::uint64_t>(i));
        const auto traj = simulate_b(at(0, 100), p, arrival, 20.0, rng, with_events());
        for (const auto& e : traj.events)
            if (e.kind == EventKind::Arrival) count[e.t < 10.0 ? 0 : 1] += 1.0;
    }
    // Poisson means 1000 and 3000 per run
    const double m0 = count[0] / runs, m1 = count[1] / runs;
    CHECK(std::abs(m0 - 1000.0) < 4.0 * std::sqrt(1000.0 / runs));
    CHECK(std::abs(m1 - 3000.0) < 4.0 * std::sqrt(3000.0 / runs));
}

TEST_CASE("declared thinning bound below the rate is an error") {
    const auto p = testing::figure_params(100.0);
    RandomStream rng(1);
    SamplingSpec s;
    s.arrival_bound = 1.0;
    CHECK_ERROR(ErrorCode::ThinningBoundViolated,
                simulate_b(at(0, 100), p, ArrivalRate::sinusoid(1.0, 0.2, 120.0), 100.0, rng, s));
}

TEST_CASE("randomized rounding averages to gamma") {
    auto p = testing::figure_params(100.0);
    p.gamma = 2.6;
    p.epsilon = 0.2;
    p.randomized_rounding = true;
    RandomStream rng(21);
    const auto traj = simulate_b(at(0, 260), p, ArrivalRate::constant(1.0), 50.0, rng, with_events());
    double sum = 0.0, n = 0.0;
    for (const auto& e : traj.events) {
        if (e.kind != EventKind::Arrival) continue;
        CHECK((e.dx == 2 || e.dx == 3));
        sum += static_cast<double>(e.dx);
        n += 1.0;
    }
    REQUIRE(n > 1000);
    CHECK(std::abs(sum / n - 2.6) < 4.0 * std::sqrt(0.24 / n));
}

TEST_CASE("scheme A first event from (0, 0, 1000)") {
    auto p = testing::figure_params();
    p.beta_tilde = 1.0;
    RandomStream rng(4);
    const auto traj = simulate_a(at(0, 0, 1000.0), p, ArrivalRate::constant(1.0), 0.01, rng, with_events(1));
    REQUIRE(traj.events.size() == 1);
    CHECK(traj.events[0].kind == EventKind::Arrival);
    RandomStream again(4);
    CtmcSimulator sim(Scheme::A, p, ArrivalRate::constant(1.0), at(0, 0, 1000.0), again, 1.0);
    sim.advance_to(traj.events[0].t);
    CHECK(sim.state().y == -1);
    CHECK(sim.state().x_target == doctest::Approx(1002.0));  // Y was 0, so no integral term
    CHECK(sim.state().x == 1002);
}

TEST_CASE("scheme A keeps X above its target") {
    auto p = testing::figure_params();
    p.beta_tilde = 0.0;
    RandomStream rng(6);
    CtmcSimulator sim(Scheme::A, p, ArrivalRate::constant(1.0), at(0, 1000, 1000.0), rng, 20.0);
    double worst_low = 0.0, worst_after_fill = 0.0;
    long long events = 0, fills = 0;
    sim.advance_to(20.0, [&](const EventRecord& rec) {
        const auto& s = sim.state();
        const double gap = static_cast<double>(s.x) - s.x_target;
        worst_low = std::min(worst_low, gap);
        if (rec.dx > 0) {
            // only replenishment raises X
            worst_after_fill = std::max(worst_after_fill, gap);
            ++fills;
        }
        if (gap >= p.gamma + 1.0) {
            // wide gaps come from downward target moves, never from an upward one
            CHECK(rec.dx <= 0);
        }
        CHECK(s.x_target >= 0.0);
        ++events;
    });
    REQUIRE(events > 10'000);
    REQUIRE(fills > 1'000);
    CHECK(worst_low >= 0.0);
    CHECK(worst_after_fill < 1.0);
}

TEST_CASE("scheme A target is clipped at zero") {
    auto p = testing::figure_params(10.0);
    p.beta_tilde = 1.0;
    RandomStream rng(9);
    const auto traj = simulate_a(at(200, 0, 0.0), p, ArrivalRate::constant(1.0), 30.0, rng);
    for (const auto& s : traj.samples) {
        CHECK(s.x_target >= 0.0);
        CHECK(s.x >= 0);
    }
}

TEST_CASE("scheme A matches |X - X_target| << r") {
    auto p = testing::figure_params();
    p.beta_tilde = 1.0;
    RandomStream rng(12);
    const auto traj = simulate_a(at(0, 0, 1000.0), p, ArrivalRate::constant(1.0), 50.0, rng);
    double sum = 0.0;
    for (const auto& s : traj.samples) sum += std::abs(static_cast<double>(s.x) - s.x_target);
    CHECK(sum / static_cast<double>(traj.samples.size()) < 0.02 * p.scale_r);
}

TEST_CASE("fluid and diffusion scaling") {
    const auto p = testing::figure_params();
    const Vec2 a = fluid_scale_point(500, 1300, p);
    CHECK(a(0) == doctest::Approx(0.5));
    CHECK(a(1) == doctest::Approx(0.3));
    CHECK(fluid_scale_point(0, 1000, p).norm() == 0.0);
    const Vec2 u = fluid_scale_point(0, 1000, p, false);
    CHECK(u(0) == 0.0);
    CHECK(u(1) == doctest::Approx(1.0));
    const double root = std::sqrt(1000.0);
    const Vec2 d = diffusion_scale_point(root * 0.5, 1000.0 - root, p);
    CHECK(d(0) == doctest::Approx(0.5));
    CHECK(d(1) == doctest::Approx(-1.0));
    CHECK(diffusion_scale_point(0.0, 1000.0, p).norm() == 0.0);

    RandomStream rng(2);
    const auto traj = simulate_b(at(0, 1000), p, ArrivalRate::sinusoid(1.0, 0.2, 120.0), 1.0, rng);
    CHECK_FALSE(fluid_scale(traj).centered);
    CHECK(fluid_scale(traj, Centering::Centered).centered);
    CHECK_ERROR(ErrorCode::ConfigInvalid, diffusion_scale(traj));
    const auto scaled = fluid_scale(traj);
    CHECK_ERROR(ErrorCode::GridOutsideHorizon, scaled.at(2.0));
}

TEST_CASE("csv and event log export") {
    const auto p = testing::figure_params(10.0);
    RandomStream rng(3);
    SamplingSpec s = with_events(5);
    s.dt = 0.5;
    const auto traj = simulate_b(at(0, 10), p, ArrivalRate::constant(1.0), 1.0, rng, s);
    std::ostringstream csv, log;
    write_trajectory_csv(csv, traj);
    CHECK(csv.str().rfind("t,y,x\n", 0) == 0);
    write_event_log_jsonl(log, traj);
    std::istringstream lines(log.str());
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("t"));
        CHECK(j.contains("kind"));
        CHECK(j.contains("dy"));
        CHECK(j.contains("dx"));
        ++n;
    }
    CHECK(n == static_cast<int>(traj.events.size()));

    auto pa = p;
    pa.beta_tilde = 1.0;
    RandomStream rng2(3);
    const auto ta = simulate_a(at(0, 10, 10.0), pa, ArrivalRate::constant(1.0), 1.0, rng2, s);
    std::ostringstream csv_a;
    write_trajectory_csv(csv_a, ta);
    CHECK(csv_a.str().rfind("t,y,x,x_target\n", 0) == 0);
}

}
