#pragma once

#include "invitesim/params.hpp"
#include "invitesim/random.hpp"
#include "invitesim/spectral.hpp"

#include <iosfwd>
#include <vector>

namespace invitesim {

/// Diffusion-scaled deviation (y_hat, x_hat).
using DiffusionState = Vec2;

/// sigma = (-sqrt(2 lambda), gamma sqrt(2 lambda)); both components share one Brownian motion.
[[nodiscard]] Vec2 noise_vector(const ModelParams& params);

struct DiffusionSample {
    double t;
    Vec2 state;
};

struct SdeOptions {
    double dt = 1e-3;
    /// Keep every `stride`-th step (the final state is always kept).
    std::size_t stride = 1;
    /// Multiplies sigma; 0 gives the deterministic linear flow.
    double noise_scale = 1.0;
};

/// Euler-Maruyama with one standard normal per step driving both components through sigma.
std::vector<DiffusionSample> simulate_sde(const DiffusionState& initial, const ModelParams& params, double horizon,
                                          RandomStream& rng, const SdeOptions& options = {});

struct MomentState {
    double t = 0.0;
    Vec2 mean = Vec2::Zero();
    Mat2 cov = Mat2::Zero();
};

/// RK4 on m' = m A, V' = V A + A^T V + sigma^T sigma; V is re-symmetrized after each step.
/// Returns the path at every `stride`-th step plus the final point.
std::vector<MomentState> moment_ode(const Vec2& m0, const Mat2& v0, const ModelParams& params, double horizon,
                                    double dt, std::size_t stride = 1);

/// Closed-form mean m(t) = sum_i alpha_i e^{-nu_i t} v_i.
[[nodiscard]] Vec2 mean_closed_form(const Vec2& m0, double t, const SpectralData& spec);

/// V(inf) = [[lambda/(beta gamma), -lambda/beta], [-lambda/beta, lambda (beta gamma^2 + epsilon)/(beta^2 gamma)]]
[[nodiscard]] Mat2 stationary_covariance(const ModelParams& params);

/// Frobenius norm of V A + A^T V + sigma^T sigma.
[[nodiscard]] double lyapunov_residual(const Mat2& v, const ModelParams& params);

/// (m(t), V(t)) of the Gaussian transient law, via moment_ode with step dt.
[[nodiscard]] MomentState gaussian_transient(const ModelParams& params, double t, const MomentState& initial,
                                             double dt = 1e-3);

/// CSV header t,m1,m2,V11,V12,V22.
void write_moments_csv(std::ostream& os, const std::vector<MomentState>& path);

}  // namespace invitesim
