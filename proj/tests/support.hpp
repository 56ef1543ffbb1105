#pragma once

#include "invitesim/error.hpp"
#include "invitesim/params.hpp"
#include "invitesim/random.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <optional>

namespace testing {

inline std::optional<invitesim::ErrorCode> error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const invitesim::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

#define CHECK_ERROR(code, expr) CHECK(::testing::error_of([&] { (void)(expr); }) == (code))

/// lambda 1, beta 1, gamma 2, epsilon 0.2 at scale r.
inline invitesim::ModelParams figure_params(double r = 1000.0) {
    invitesim::ModelParams p;
    p.scale_r = r;
    return p;
}

/// Random parameter set strictly inside the stable region.
inline invitesim::ModelParams random_params(invitesim::RandomStream& rng) {
    invitesim::ModelParams p;
    p.lambda = 0.2 + 3.0 * rng.uniform();
    p.beta = 0.2 + 3.0 * rng.uniform();
    p.gamma = 1.0 + 4.0 * rng.uniform();
    p.epsilon = (0.02 + 0.96 * rng.uniform()) * p.gamma * p.gamma * p.beta / 4.0;
    p.randomized_rounding = true;
    return p;
}

/// Plain bisection for a sign change of f on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace testing
