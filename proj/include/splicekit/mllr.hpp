#pragma once

#include "splicekit/common.hpp"
#include "splicekit/gmm.hpp"

#include <Eigen/Dense>

namespace splicekit {

// Global mean transform acting on the extended mean [1, mu^T]^T.
struct MllrTransform {
  Eigen::MatrixXd w;  // D x (D+1)

  int dim() const { return static_cast<int>(w.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& mean) const;
  static MllrTransform identity(int dim);
};

struct MllrOptions {
  // E-step / maximize cycles. Each cycle re-solves the exact normal
  // equations, so the adaptation-data likelihood never decreases.
  int cycles = 2;
  // Trace-scaled ridge added to the normal equations for conditioning.
  double ridge_scale = 1e-8;
};

// Maximum-likelihood global mean transform of the GMM towards the frames,
// weights and covariances fixed. Diagonal models solve one row per feature
// dimension; full models solve the coupled D(D+1) system. Fewer than D+1
// frames triggers the ridge path with a warning. Guaranteed not to decrease
// the adaptation-data log-likelihood (falls back to identity if a degenerate
// solve ever would).
MllrTransform estimate_global_mllr_mean(const Gmm& gmm, const FeatureMatrix& frames,
                                        const MllrOptions& options = {},
                                        const WarningSink& warnings = {});

// Means become W [1, mu]; weights and covariances are copied untouched and
// component order is preserved.
Gmm apply_mllr_means(const Gmm& gmm, const MllrTransform& transform);

}  // namespace splicekit
