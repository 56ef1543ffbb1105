#include "invitesim/fluid.hpp"
#include "invitesim/reference_fluid.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace invitesim;

TEST_SUITE("fluid") {

TEST_CASE("interior solution") {
    const auto p = testing::figure_params();
    const auto spec = spectral_decompose(p);
    CHECK(interior_solution(Vec2::Zero(), 3.0, spec).norm() == 0.0);
    const Vec2 v = interior_solution(spec.v1, 2.5, spec);
    CHECK((v - std::exp(-spec.nu1 * 2.5) * spec.v1).norm() < 1e-13);
    const Vec2 u = interior_solution(Vec2(0.0, 2.0), 1.0, spec);
    const Vec2 ref = reference::integrate_linear(Vec2(0.0, 2.0), p, 1.0);
    CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("boundary hit time") {
    const auto p = testing::figure_params();
    const auto spec = spectral_decompose(p);
    CHECK_FALSE(boundary_hit_time(Vec2::Zero(), p, spec).has_value());
    CHECK_FALSE(boundary_hit_time(Vec2(0.0, 2.0), p, spec).has_value());

    const Vec2 u0(30.0, -0.99);
    const auto hit = boundary_hit_time(u0, p, spec);
    REQUIRE(hit.has_value());
    CHECK(*hit > 0.0);
    CHECK(interior_solution(u0, *hit, spec)(1) == doctest::Approx(-1.0).epsilon(1e-10));
    for (int k = 1; k < 1000; ++k) {
        const double t = *hit * k / 1000.0;
        REQUIRE(interior_solution(u0, t, spec)(1) > -1.0);
    }
    // dense numerical integration brackets the same root
    CHECK(reference::integrate_linear(u0, p, *hit - 1e-6)(1) > -1.0);
    CHECK(reference::integrate_linear(u0, p, *hit + 1e-6)(1) < -1.0);
}

TEST_CASE("no boundary hit from (0, 2) over a long window") {
    const auto p = testing::figure_params();
    const auto spec = spectral_decompose(p);
    for (int k = 0; k <= 10000; ++k) CHECK(interior_solution(Vec2(0.0, 2.0), 0.01 * k, spec)(1) > -1.0);
}

TEST_CASE("boundary segment duration") {
    const auto p = testing::figure_params();
    const auto traj = solve_fluid(Vec2(15.0, -1.0), p, 50.0);
    REQUIRE(traj.segments().size() == 2);
    const auto& b = traj.segments()[0];
    CHECK(b.kind == FluidSegment::Kind::Boundary);
    CHECK(b.duration == doctest::Approx(5.0).epsilon(1e-14));
    const Vec2 exit = traj.state(5.0);
    CHECK(exit(0) == doctest::Approx(10.0));
    CHECK(exit(1) == doctest::Approx(-1.0));
    CHECK(traj.segments()[1].kind == FluidSegment::Kind::Interior);
    CHECK(traj.boundary_segments() == 1);
}

TEST_CASE("leaving the boundary immediately") {
    const auto p = testing::figure_params();
    const auto traj = solve_fluid(Vec2(5.0, -1.0), p, 50.0);
    CHECK(traj.segments().size() == 1);
    CHECK(traj.boundary_segments() == 0);
    CHECK(traj.state(0.1)(1) > -1.0);
    // grazing exactly at y = gamma lambda / epsilon
    CHECK(solve_fluid(Vec2(10.0, -1.0), p, 50.0).boundary_segments() == 0);
}

TEST_CASE("convergence from the scaled figure initial states") {
    const auto p = testing::figure_params();
    const auto spec = spectral_decompose(p);
    for (const Vec2& u0 : {Vec2(0.0, -1.0), Vec2(1.0, -1.0), Vec2(0.0, 1.0), Vec2(-1.0, 1.0)}) {
        const auto traj = solve_fluid(u0, p, 50.0);
        CHECK(star_norm(traj.state(50.0), spec) <= 1e-3 * std::max(1.0, star_norm(u0, spec)));
    }
    CHECK(star_norm(solve_fluid(Vec2(-1.0, 1.0), p, 50.0).state(50.0), spec) <= 1e-3);
}

TEST_CASE("invalid initial and horizon") {
    const auto p = testing::figure_params();
    CHECK_ERROR(ErrorCode::InvalidInitial, solve_fluid(Vec2(0.0, -1.5), p, 10.0));
    CHECK_ERROR(ErrorCode::HorizonZero, solve_fluid(Vec2(0.0, 0.0), p, 0.0));
    const auto traj = solve_fluid(Vec2(0.0, 1.0), p, 10.0);
    CHECK_ERROR(ErrorCode::GridOutsideHorizon, traj.state(11.0));
}

TEST_CASE("drift checks") {
    const auto p = testing::figure_params();
    const auto spec = spectral_decompose(p);
    const auto a = drift_check(solve_fluid(Vec2(0.0, 2.0), p, 100.0), 0.01);
    CHECK(a.min_interior_decay_ratio >= spec.nu1 * (1.0 - 1e-6));
    CHECK(a.boundary_points == 0);
    CHECK(a.norm_nonincreasing);

    const auto b = drift_check(solve_fluid(Vec2(15.0, -1.0), p, 50.0), 0.01);
    CHECK(b.boundary_points > 0);
    CHECK(b.max_boundary_drift < 0.0);
    CHECK(b.boundary_segments == 1);
    CHECK(b.norm_nonincreasing);

    const auto c = drift_check(solve_fluid(Vec2::Zero(), p, 10.0), 0.1);
    CHECK(c.max_norm == 0.0);
    CHECK(c.interior_points == 0);
}

TEST_CASE("random initial states: structure, continuity, agreement with numerical integration") {
    const auto p = testing::figure_params();
    const auto spec = spectral_decompose(p);
    RandomStream rng(77);
    std::vector<double> times;
    for (int k = 0; k <= 1000; ++k) times.push_back(0.05 * k);
    for (int i = 0; i < 100; ++i) {
        const Vec2 u0(-20.0 + 40.0 * rng.uniform(), -1.0 + 21.0 * rng.uniform());
        const auto traj = solve_fluid(u0, p, 50.0);
        REQUIRE(traj.boundary_segments() <= 1);
        REQUIRE(traj.segments().size() <= 3);
        for (std::size_t s = 1; s < traj.segments().size(); ++s) {
            const auto& prev = traj.segments()[s - 1];
            const auto& next = traj.segments()[s];
            CHECK(next.start == doctest::Approx(prev.end()));
            CHECK((traj.segment_state(prev, prev.end()) - traj.segment_state(next, next.start)).norm() < 1e-9);
            if (prev.kind == FluidSegment::Kind::Boundary)
                CHECK(traj.segment_state(prev, prev.end())(0) == doctest::Approx(p.gamma * p.lambda / p.epsilon));
        }
        const auto ref = reference::integrate_fluid(u0, p, times);
        double err = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const Vec2 s = traj.state(times[k]);
            CHECK(s(1) >= -p.lambda / p.beta - 1e-12);
            err = std::max(err, (s - ref.states[k]).cwiseAbs().maxCoeff());
        }
        CHECK(err <= 1e-6);
        CHECK(ref.boundary_entries == static_cast<int>(traj.boundary_segments()));
        CHECK(drift_check(traj, 0.05).norm_nonincreasing);
        CHECK(star_norm(solve_fluid(u0, p, 50.0 / spec.nu1).state(50.0 / spec.nu1), spec) <= 1e-3);
    }
}

TEST_CASE("csv and segment export") {
    const auto p = testing::figure_params();
    const auto traj = solve_fluid(Vec2(15.0, -1.0), p, 10.0);
    std::ostringstream os;
    write_fluid_csv(os, traj, 1.0);
    const auto text = os.str();
    CHECK(text.rfind("t,y,x,segment_kind\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 12);
    CHECK(text.find("boundary") != std::string::npos);
    const auto j = segments_json(traj);
    REQUIRE(j["segments"].is_array());
    CHECK(j["segments"].size() == 2);
    CHECK(j["segments"][0]["kind"] == "boundary");
    CHECK(j["boundary_segments"] == 1);
}

}
