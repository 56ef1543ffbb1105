#include "invitesim/params.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace invitesim;

TEST_SUITE("params") {

TEST_CASE("published parameter set validates unchanged") {
    ModelParams p;
    p.lambda = 1.0;
    p.beta = 1.0;
    p.gamma = 2.0;
    p.epsilon = 0.2;
    CHECK(validate_params(p) == p);
}

TEST_CASE("stability boundary is rejected") {
    auto p = testing::figure_params();
    p.epsilon = 1.0;  // gamma^2 beta / 4
    CHECK_ERROR(ErrorCode::StabilityViolation, validate_params(p));
    p.epsilon = 0.999999;
    CHECK_NOTHROW(validate_params(p));
}

TEST_CASE("non-positive rates") {
    auto p = testing::figure_params();
    p.beta = 0.0;
    CHECK_ERROR(ErrorCode::NonPositiveRate, validate_params(p));
    p = testing::figure_params();
    p.lambda = -1.0;
    CHECK_ERROR(ErrorCode::NonPositiveRate, validate_params(p));
    p = testing::figure_params();
    p.scale_r = 0.0;
    CHECK_ERROR(ErrorCode::NonPositiveRate, validate_params(p));
    p = testing::figure_params();
    p.beta_tilde = -0.5;
    CHECK_ERROR(ErrorCode::NonPositiveRate, validate_params(p, Scheme::A));
    p.beta_tilde = 0.0;
    CHECK_NOTHROW(validate_params(p, Scheme::A));
}

TEST_CASE("integer gamma required for scheme B only") {
    auto p = testing::figure_params();
    p.gamma = 2.6;
    CHECK_ERROR(ErrorCode::NonIntegerGamma, validate_params(p, Scheme::B));
    CHECK_NOTHROW(validate_params(p, Scheme::A));
    p.randomized_rounding = true;
    CHECK_NOTHROW(validate_params(p, Scheme::B));
    CHECK(is_integer_gamma(3.0));
    CHECK_FALSE(is_integer_gamma(2.5));
}

TEST_CASE("arrival rate shapes") {
    const auto c = ArrivalRate::constant(1.5);
    CHECK(c.is_constant());
    CHECK(c(123.0) == 1.5);

    const auto s = ArrivalRate::sinusoid(1.0, 0.2, 120.0);
    CHECK(s(0.0) == doctest::Approx(1.0));
    CHECK(s(30.0) == doctest::Approx(1.2));
    CHECK(s(90.0) == doctest::Approx(0.8));
    CHECK(s.upper_bound(500.0) >= 1.2);
    CHECK(s.jumps_before(500.0).empty());

    const auto pw = ArrivalRate::piecewise({10.0, 20.0}, {1.0, 2.0, 0.5});
    CHECK(pw(0.0) == 1.0);
    CHECK(pw(9.999) == 1.0);
    CHECK(pw(10.0) == 2.0);
    CHECK(pw(25.0) == 0.5);
    CHECK(pw.upper_bound(100.0) == 2.0);
    CHECK(pw.upper_bound(5.0) == 1.0);
    CHECK(pw.jumps_before(15.0) == std::vector<double>{10.0});
}

TEST_CASE("json round trip") {
    auto p = testing::figure_params(500.0);
    p.beta_tilde = 1.0;
    const auto arrival = ArrivalRate::sinusoid(1.0, 0.2, 120.0);
    const auto doc = params_to_json(p, arrival);
    const auto back = params_from_json(doc);
    CHECK(back.params == p);
    CHECK(back.arrival == arrival);

    const auto plain = params_from_json(nlohmann::json{{"lambda", 2.0}, {"r", 100}, {"beta", 1}, {"gamma", 2},
                                                       {"epsilon", 0.2}});
    CHECK(plain.arrival.is_constant());
    CHECK(plain.arrival(0.0) == 2.0);
    CHECK(plain.params.scale_r == 100.0);

    CHECK_ERROR(ErrorCode::ConfigInvalid, params_from_json(nlohmann::json{{"lambda", "fast"}}));
    CHECK_ERROR(ErrorCode::ConfigInvalid,
                params_from_json(nlohmann::json{{"arrival", {{"kind", "weird"}}}}));
}

}
