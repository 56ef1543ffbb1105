#include "invitesim/spectral.hpp"

#include "invitesim/error.hpp"

#include <cmath>

namespace invitesim {

Mat2 drift_matrix(const ModelParams& p) {
    Mat2 a;
    a << 0.0, -p.epsilon,
         p.beta, -p.gamma * p.beta;
    return a;
}

SpectralData spectral_decompose(const ModelParams& p) {
    // nu^2 - gamma beta nu + epsilon beta = 0
    const double sum = p.gamma * p.beta;
    const double product = p.epsilon * p.beta;
    const double disc = sum * sum - 4.0 * product;
    if (!(disc > 0.0))
        throw Error(ErrorCode::RepeatedEigenvalue, "discriminant gamma^2 beta^2 - 4 epsilon beta <= 0");

    SpectralData s;
    // Larger root first, smaller from the product to avoid cancellation.
    s.nu2 = 0.5 * (sum + std::sqrt(disc));
    s.nu1 = product / s.nu2;
    s.a1 = p.beta / s.nu1;
    s.a2 = p.beta / s.nu2;
    s.v1 = Vec2(s.a1, -1.0);
    s.v2 = Vec2(s.a2, -1.0);
    s.basis.row(0) = s.v1;
    s.basis.row(1) = s.v2;
    // Closed-form inverse of [[a1, -1], [a2, -1]]; det = a2 - a1.
    const double det = s.a2 - s.a1;
    s.basis_inverse << -1.0 / det, 1.0 / det,
                       -s.a2 / det, s.a1 / det;
    return s;
}

Vec2 star_coords(const Vec2& u, const SpectralData& spec) { return u * spec.basis_inverse; }

double star_norm(const Vec2& u, const SpectralData& spec) { return star_coords(u, spec).norm(); }

NormEquivalence star_norm_equivalence(const SpectralData& spec) {
    Eigen::JacobiSVD<Mat2> svd(spec.basis_inverse);
    const auto& sv = svd.singularValues();
    return {sv(1), sv(0)};
}

}  // namespace invitesim
