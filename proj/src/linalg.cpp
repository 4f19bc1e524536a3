#include "splicekit/linalg.hpp"

#include "splicekit/common.hpp"

#include <algorithm>
#include <cmath>

namespace splicekit {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
  return 0.5 * (a + a.transpose());
}

double relative_asymmetry(const Eigen::MatrixXd& a) {
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
  return (a - a.transpose()).cwiseAbs().maxCoeff() / scale;
}

Eigen::MatrixXd floor_spd(const Eigen::MatrixXd& symmetric, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed while flooring a covariance");
  }
  Eigen::VectorXd values = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  return eig.eigenvalues().minCoeff();
}

namespace {

Eigen::MatrixXd spd_power(const Eigen::MatrixXd& symmetric, double exponent,
                          double eigen_floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetrize(symmetric));
  if (eig.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed in matrix power");
  }
  const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  const double floor = std::max(top * eigen_floor, 1e-300);
  Eigen::VectorXd values = eig.eigenvalues().cwiseMax(floor);
  for (int i = 0; i < values.size(); ++i) values[i] = std::pow(values[i], exponent);
  return eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& symmetric, double eigen_floor) {
  return spd_power(symmetric, 0.5, eigen_floor);
}

Eigen::MatrixXd spd_inv_sqrt(const Eigen::MatrixXd& symmetric, double eigen_floor) {
  return spd_power(symmetric, -0.5, eigen_floor);
}

Eigen::VectorXd solve_ridge_refined(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                    double ridge_scale) {
  const double ridge =
      ridge_scale * std::max(a.trace() / static_cast<double>(a.rows()), 1e-300);
  Eigen::MatrixXd regularized = a;
  regularized.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(regularized);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("LDLT factorization failed in regularized solve");
  }
  Eigen::VectorXd x = ldlt.solve(b);
  // One refinement pass removes the ridge bias on consistent systems.
  Eigen::VectorXd residual = b - a * x;
  x += ldlt.solve(residual);
  if (!x.allFinite()) {
    throw NumericalError("regularized solve produced non-finite values");
  }
  return x;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

}  // namespace splicekit
