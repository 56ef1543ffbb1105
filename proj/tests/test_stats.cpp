#include "invitesim/diffusion.hpp"
#include "invitesim/stats.hpp"

#include "support.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>
#include <sstream>

using namespace invitesim;

namespace {

Curve constant_curve(Vec2 v, double t1) {
    return {0.0, t1, [v](double) { return v; }};
}

/// Unit-spaced i.i.d. Gaussian series with covariance `cov`.
TimeSeries gaussian_series(const Mat2& cov, std::size_t n, RandomStream& rng) {
    const Mat2 l = cov.llt().matrixL();
    TimeSeries s;
    for (std::size_t i = 0; i < n; ++i) {
        s.t.push_back(static_cast<double>(i));
        s.value.push_back(Vec2(rng.normal(), rng.normal()) * l.transpose());
    }
    s.t_end = static_cast<double>(n);
    return s;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("sup deviation") {
    const Curve a{0.0, 10.0, [](double t) { return Vec2(std::sin(t), 0.1 * t); }};
    const Curve b{0.0, 10.0, [](double t) { return Vec2(std::sin(t) + 0.01 * t, 0.0); }};
    const TimeGrid grid{0.0, 10.0, 0.05};
    CHECK(sup_deviation(a, a, grid).sup == 0.0);
    const auto ab = sup_deviation(a, b, grid);
    const auto ba = sup_deviation(b, a, grid);
    CHECK(ab.sup == ba.sup);
    CHECK(ab.sup == doctest::Approx(1.0));
    CHECK(ab.t_at_sup == doctest::Approx(10.0));
    CHECK(grid.points().size() == 201);
    CHECK_ERROR(ErrorCode::GridOutsideHorizon,
                sup_deviation(a, constant_curve(Vec2::Zero(), 5.0), grid));
}

TEST_CASE("batch means of a constant series") {
    TimeSeries s;
    s.t = {0.0, 3.0};
    s.value = {Vec2(1.0, -2.0), Vec2(1.0, -2.0)};
    s.t_end = 100.0;
    const auto est = batch_means(s, 10.0, 10);
    CHECK(est.mean(0) == doctest::Approx(1.0));
    CHECK(est.mean(1) == doctest::Approx(-2.0));
    CHECK(est.cov.norm() < 1e-12);
    CHECK(est.mean_half_width.norm() < 1e-12);
    CHECK(est.batch_length == doctest::Approx(9.0));
}

TEST_CASE("insufficient data") {
    TimeSeries s;
    s.t = {0.0};
    s.value = {Vec2(0.0, 0.0)};
    s.t_end = 10.0;
    CHECK_ERROR(ErrorCode::InsufficientData, batch_means(s, 0.0, 5));
    CHECK_ERROR(ErrorCode::InsufficientData, batch_means(s, 20.0, 10));
    CHECK_ERROR(ErrorCode::InsufficientData, batch_means(TimeSeries{}, 0.0, 10));
}

TEST_CASE("splitting a constant piece does not change the estimate") {
    RandomStream rng(4);
    const auto s = gaussian_series(Mat2::Identity(), 400, rng);
    TimeSeries split = s;
    split.t.insert(split.t.begin() + 101, 100.5);
    split.value.insert(split.value.begin() + 101, split.value[100]);
    const auto a = batch_means(s, 0.0, 10);
    const auto b = batch_means(split, 0.0, 10);
    CHECK((a.mean - b.mean).norm() < 1e-12);
    CHECK((a.cov - b.cov).norm() < 1e-12);
    CHECK(a.skew_y == doctest::Approx(b.skew_y));
}

TEST_CASE("mean confidence intervals cover at roughly the nominal rate") {
    RandomStream rng(5);
    int covered = 0;
    constexpr int reps = 200;
    for (int k = 0; k < reps; ++k) {
        const auto est = batch_means(gaussian_series(Mat2::Identity(), 2000, rng), 0.0, 20);
        covered += std::abs(est.mean(0)) <= est.mean_half_width(0);
    }
    // 95% nominal; binomial sd at n = 200 is about 1.5%
    CHECK(covered >= 180);
    CHECK(covered <= 198);
}

TEST_CASE("gaussian check on synthetic data") {
    const auto p = testing::figure_params();
    RandomStream rng(6);
    const Mat2 v = stationary_covariance(p);
    const auto est = batch_means(gaussian_series(v, 100'000, rng), 0.0, 20);
    const auto rep = gaussian_check(est, p);
    CHECK(rep.pass);
    CHECK_FALSE(rep.pre_asymptotic);
    CHECK(rep.entries.size() == 7);

    const auto small = gaussian_check(est, testing::figure_params(10.0));
    CHECK(small.pre_asymptotic);

    const auto wrong = batch_means(gaussian_series(2.0 * v, 100'000, rng), 0.0, 20);
    CHECK_FALSE(gaussian_check(wrong, p).pass);
}

TEST_CASE("ctmc initial from fluid") {
    const auto p = testing::figure_params();
    const auto s = ctmc_initial_from_fluid(Vec2(1.0, -1.0), p);
    CHECK(s.y == 1000);
    CHECK(s.x == 0);
    const auto back = fluid_scale_point(s.y, s.x, p);
    CHECK(back(0) == doctest::Approx(1.0));
    CHECK(back(1) == doctest::Approx(-1.0));
}

TEST_CASE("scale sweep") {
    const auto p = testing::figure_params();
    SweepOptions opt;
    opt.horizon = 10.0;
    opt.replications = 6;
    opt.seed = 3;
    const auto sweep = scale_sweep({50.0, 200.0, 800.0}, {Vec2(0.0, 1.0), Vec2(1.0, -1.0)}, p, opt);
    REQUIRE(sweep.rows.size() == 3);
    CHECK(sweep.monotone_decreasing);
    CHECK(sweep.loglog_slope >= -0.7);
    CHECK(sweep.loglog_slope <= -0.3);
    for (const auto& row : sweep.rows) {
        CHECK(row.n == 12);
        CHECK(row.std_dev >= 0.0);
    }
    std::ostringstream os;
    write_sweep_csv(os, sweep);
    CHECK(os.str().find('\n') != std::string::npos);

    opt.replications = 1;
    const auto single = scale_sweep({100.0}, {Vec2(0.0, 1.0)}, p, opt);
    CHECK(std::isnan(single.rows[0].std_dev));
}

}
