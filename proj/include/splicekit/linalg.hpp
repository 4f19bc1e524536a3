#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>

namespace splicekit {

// (A + A^T) / 2.
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a);

// Largest absolute asymmetry relative to max(|a|_inf, 1).
double relative_asymmetry(const Eigen::MatrixXd& a);

// Clamps the eigenvalues of a symmetric matrix at floor and rebuilds it.
Eigen::MatrixXd floor_spd(const Eigen::MatrixXd& symmetric, double floor);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

// Symmetric PSD square root / inverse square root via eigendecomposition.
// Eigenvalues are clamped at eigen_floor (relative to the largest eigenvalue)
// before rooting so near-singular inputs stay finite.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& symmetric,
                         double eigen_floor = 1e-12);
Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& symmetric,
                             double eigen_floor = 1e-12);

// Solves (A + ridge*I) x = b by LDLT with one iterative refinement pass, so
// consistent systems are solved to machine precision while rank-deficient
// ones stay bounded. ridge is scaled by trace(A)/rows.
Eigen::VectorXd solve_ridge_refined(const Eigen::MatrixXd& a,
                                    const Eigen::VectorXd& b,
                                    double ridge_scale = 1e-8);

// FNV-1a over a byte string; used to fingerprint serialized models.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace splicekit
