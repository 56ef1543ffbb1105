#include "invitesim/diffusion.hpp"

#include "invitesim/error.hpp"
#include "invitesim/io.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace invitesim {

Vec2 noise_vector(const ModelParams& p) {
    const double s = std::sqrt(2.0 * p.lambda);
    return Vec2(-s, p.gamma * s);
}

std::vector<DiffusionSample> simulate_sde(const DiffusionState& initial, const ModelParams& params, double horizon,
                                          RandomStream& rng, const SdeOptions& opt) {
    if (!(opt.dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "SDE dt must be > 0");
    if (!(horizon > 0.0)) throw Error(ErrorCode::HorizonZero, "SDE horizon must be > 0");
    const Mat2 a = drift_matrix(params);
    const Vec2 sigma = opt.noise_scale * noise_vector(params);
    const double sqrt_dt = std::sqrt(opt.dt);
    const auto steps = static_cast<std::size_t>(std::llround(std::ceil(horizon / opt.dt - 1e-9)));
    const std::size_t stride = std::max<std::size_t>(opt.stride, 1);

    std::vector<DiffusionSample> path;
    path.reserve(steps / stride + 2);
    path.push_back({0.0, initial});
    Vec2 z = initial;
    for (std::size_t k = 1; k <= steps; ++k) {
        const double h = std::min(opt.dt, horizon - static_cast<double>(k - 1) * opt.dt);
        const double dw = (h == opt.dt ? sqrt_dt : std::sqrt(h)) * rng.normal();
        z = z + h * (z * a) + dw * sigma;
        if (k % stride == 0 || k == steps) path.push_back({std::min(static_cast<double>(k) * opt.dt, horizon), z});
    }
    return path;
}

namespace {

struct MomentDeriv {
    Vec2 dm;
    Mat2 dv;
};

MomentDeriv moment_field(const Vec2& m, const Mat2& v, const Mat2& a, const Mat2& q) {
    return {m * a, v * a + a.transpose() * v + q};
}

}  // namespace

std::vector<MomentState> moment_ode(const Vec2& m0, const Mat2& v0, const ModelParams& params, double horizon,
                                    double dt, std::size_t stride) {
    if ((v0 - v0.transpose()).norm() > 1e-12 * std::max(1.0, v0.norm()))
        throw Error(ErrorCode::NonSymmetricV0, "initial covariance must be symmetric");
    if (!(dt > 0.0)) throw Error(ErrorCode::ConfigInvalid, "dt must be > 0");
    const Mat2 a = drift_matrix(params);
    const Vec2 sigma = noise_vector(params);
    const Mat2 q = sigma.transpose() * sigma;
    stride = std::max<std::size_t>(stride, 1);

    std::vector<MomentState> path;
    MomentState cur{0.0, m0, v0};
    path.push_back(cur);
    if (horizon <= 0.0) return path;
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    for (std::size_t k = 1; k <= steps; ++k) {
        const double h = std::min(dt, horizon - cur.t);
        const auto k1 = moment_field(cur.mean, cur.cov, a, q);
        const auto k2 = moment_field(cur.mean + 0.5 * h * k1.dm, cur.cov + 0.5 * h * k1.dv, a, q);
        const auto k3 = moment_field(cur.mean + 0.5 * h * k2.dm, cur.cov + 0.5 * h * k2.dv, a, q);
        const auto k4 = moment_field(cur.mean + h * k3.dm, cur.cov + h * k3.dv, a, q);
        cur.mean += (h / 6.0) * (k1.dm + 2.0 * k2.dm + 2.0 * k3.dm + k4.dm);
        cur.cov += (h / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
        cur.cov = 0.5 * (cur.cov + cur.cov.transpose()).eval();
        cur.t = k == steps ? horizon : static_cast<double>(k) * dt;
        if (k % stride == 0 || k == steps) path.push_back(cur);
    }
    return path;
}

Vec2 mean_closed_form(const Vec2& m0, double t, const SpectralData& spec) {
    const Vec2 alpha = star_coords(m0, spec);
    return alpha(0) * std::exp(-spec.nu1 * t) * spec.v1 + alpha(1) * std::exp(-spec.nu2 * t) * spec.v2;
}

Mat2 stationary_covariance(const ModelParams& p) {
    const double l = p.lambda;
    const double b = p.beta;
    const double g = p.gamma;
    Mat2 v;
    v << l / (b * g), -l / b,
         -l / b, l * (b * g * g + p.epsilon) / (b * b * g);
    return v;
}

double lyapunov_residual(const Mat2& v, const ModelParams& params) {
    const Mat2 a = drift_matrix(params);
    const Vec2 sigma = noise_vector(params);
    return (v * a + a.transpose() * v + sigma.transpose() * sigma).norm();
}

MomentState gaussian_transient(const ModelParams& params, double t, const MomentState& initial, double dt) {
    if (t <= 0.0) return initial;
    const auto path = moment_ode(initial.mean, initial.cov, params, t, dt, std::numeric_limits<std::size_t>::max());
    MomentState out = path.back();
    out.t = initial.t + t;
    return out;
}

void write_moments_csv(std::ostream& os, const std::vector<MomentState>& path) {
    os << "t,m1,m2,V11,V12,V22\n";
    for (const auto& s : path) {
        os << format_number(s.t) << ',' << format_number(s.mean(0)) << ',' << format_number(s.mean(1)) << ','
           << format_number(s.cov(0, 0)) << ',' << format_number(s.cov(0, 1)) << ',' << format_number(s.cov(1, 1))
           << '\n';
    }
}

}  // namespace invitesim
