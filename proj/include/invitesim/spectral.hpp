#pragma once

#include "invitesim/params.hpp"

#include <Eigen/Dense>

namespace invitesim {

/// States are row vectors (y, x); the linear fluid field is d/dt (y, x) = (y, x) A.
using Vec2 = Eigen::RowVector2d;
using Mat2 = Eigen::Matrix2d;

/// A = [[0, -epsilon], [beta, -gamma beta]]
[[nodiscard]] Mat2 drift_matrix(const ModelParams& params);

/// Eigen-structure of the drift matrix. Eigenvalues are -nu1 > -nu2, with
/// left eigenvectors v_i = (a_i, -1), a_i = beta / nu_i.
struct SpectralData {
    double nu1 = 0.0;
    double nu2 = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    Vec2 v1 = Vec2::Zero();
    Vec2 v2 = Vec2::Zero();
    /// Rows v1, v2.
    Mat2 basis = Mat2::Identity();
    Mat2 basis_inverse = Mat2::Identity();
};

SpectralData spectral_decompose(const ModelParams& params);

/// Coordinates (alpha1, alpha2) with u = alpha1 v1 + alpha2 v2.
[[nodiscard]] Vec2 star_coords(const Vec2& u, const SpectralData& spec);

/// Euclidean norm of the eigen-coordinates of u.
[[nodiscard]] double star_norm(const Vec2& u, const SpectralData& spec);

/// Constants c1, c2 with c1 |u| <= |u|* <= c2 |u|.
struct NormEquivalence {
    double lower = 0.0;
    double upper = 0.0;
};
[[nodiscard]] NormEquivalence star_norm_equivalence(const SpectralData& spec);

}  // namespace invitesim
