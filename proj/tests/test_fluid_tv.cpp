#include "invitesim/fluid.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace invitesim;

TEST_SUITE("fluid_tv") {

TEST_CASE("constant rate reduces to the closed-form solver") {
    const auto p = testing::figure_params();
    const auto arrival = ArrivalRate::constant(p.lambda);
    const double shift = p.lambda / p.beta;
    for (const Vec2& u0 : {Vec2(0.0, 1.0), Vec2(15.0, -1.0), Vec2(30.0, -0.99), Vec2(-1.0, 1.0), Vec2(12.0, 3.0),
                          Vec2(1.0, -1.0)}) {
        const auto closed = solve_fluid(u0, p, 50.0);
        const auto tv = solve_fluid_tv(Vec2(u0(0), u0(1) + shift), arrival, p, 50.0, 1e-3);
        double err = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double t = 0.05 * k;
            const Vec2 a = closed.state(t);
            const Vec2 b = tv.at(t);
            err = std::max(err, std::max(std::abs(a(0) - b(0)), std::abs(a(1) + shift - b(1))));
        }
        CHECK(err <= 1e-6);
    }
}

TEST_CASE("zero arrivals: y rises to a plateau and x drains to zero") {
    const auto p = testing::figure_params();
    const auto tv = solve_fluid_tv(Vec2(0.0, 1.0), ArrivalRate::constant(0.0), p, 60.0, 1e-3);
    double prev_y = -1.0;
    for (const auto& s : tv.samples) {
        CHECK(s.y >= prev_y - 1e-12);
        CHECK(s.x >= -1e-12);
        prev_y = s.y;
    }
    CHECK(tv.samples.back().y > 0.0);
    CHECK(tv.samples.back().x < 1e-9);
}

TEST_CASE("sinusoidal load stays feasible and tracks lambda / beta") {
    const auto p = testing::figure_params();
    const auto arrival = ArrivalRate::sinusoid(1.0, 0.2, 120.0);
    const auto tv = solve_fluid_tv(Vec2(0.0, 0.0), arrival, p, 500.0, 1e-3);
    CHECK(tv.horizon == 500.0);
    double worst = 0.0;
    for (const auto& s : tv.samples) {
        CHECK(s.x >= -1e-12);
        if (s.t > 50.0) worst = std::max(worst, std::abs(s.x - arrival(s.t) / p.beta));
    }
    CHECK(worst < 0.1);
}

TEST_CASE("lambda jumps are resolved independently of the step") {
    const auto p = testing::figure_params();
    const auto arrival = ArrivalRate::piecewise({3.3337, 10.0}, {1.0, 2.0, 0.3});
    const auto coarse = solve_fluid_tv(Vec2(0.0, 1.0), arrival, p, 30.0, 1e-3);
    const auto fine = solve_fluid_tv(Vec2(0.0, 1.0), arrival, p, 30.0, 2.5e-4);
    double err = 0.0;
    for (int k = 0; k <= 300; ++k) {
        const double t = 0.1 * k;
        err = std::max(err, (coarse.at(t) - fine.at(t)).cwiseAbs().maxCoeff());
    }
    CHECK(err < 1e-6);
}

TEST_CASE("negative initial x") {
    const auto p = testing::figure_params();
    CHECK_ERROR(ErrorCode::NegativeInitialX, solve_fluid_tv(Vec2(0.0, -0.1), ArrivalRate::constant(1.0), p, 1.0));
}

}
