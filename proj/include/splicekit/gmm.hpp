#pragma once

#include "splicekit/common.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace splicekit {

enum class CovarianceMode { Full, Diagonal };

// Single mixture component. Immutable once constructed; density caches
// (Cholesky factor or inverse variances) are built eagerly.
class Gaussian {
 public:
  // Full covariance. The matrix must be finite, symmetric to 1e-12 relative
  // and positive definite (callers floor eigenvalues before construction).
  Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  // Diagonal mode stores just the per-dimension variances.
  Gaussian(Eigen::VectorXd mean, Eigen::VectorXd variances);

  int dim() const { return static_cast<int>(mean_.size()); }
  CovarianceMode mode() const { return mode_; }
  const Eigen::VectorXd& mean() const { return mean_; }

  // Full-mode accessor; throws UsageError in diagonal mode.
  const Eigen::MatrixXd& covariance() const;
  // Diagonal-mode accessor; throws UsageError in full mode.
  const Eigen::VectorXd& variances() const;
  // Dense covariance regardless of mode.
  Eigen::MatrixXd covariance_matrix() const;

  double log_density(const Eigen::VectorXd& x) const;
  double min_covariance_eigenvalue() const;

 private:
  CovarianceMode mode_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;      // full mode
  Eigen::VectorXd variances_;      // diagonal mode
  Eigen::MatrixXd chol_lower_;     // full mode cache
  Eigen::VectorXd inv_variances_;  // diagonal mode cache
  double log_norm_ = 0.0;          // -(D log 2pi + log|Sigma|) / 2
};

// Mixture density. Weights form a simplex; all components share dimension
// and storage mode. Immutable and safe to share across threads.
class Gmm {
 public:
  Gmm(Eigen::VectorXd weights, std::vector<Gaussian> components);

  int dim() const { return components_.front().dim(); }
  int mixtures() const { return static_cast<int>(components_.size()); }
  CovarianceMode mode() const { return components_.front().mode(); }
  const Eigen::VectorXd& weights() const { return weights_; }
  const Gaussian& component(int m) const { return components_[static_cast<std::size_t>(m)]; }
  const std::vector<Gaussian>& components() const { return components_; }

 private:
  Eigen::VectorXd weights_;
  std::vector<Gaussian> components_;
};

// log p(y) in log-sum-exp form; finite for finite input.
double log_density(const Gmm& gmm, const Eigen::VectorXd& frame);

// Total log-likelihood of all frames.
double log_likelihood(const Gmm& gmm, const FeatureMatrix& frames);

// N x M responsibilities; each row is a probability simplex.
Eigen::MatrixXd posteriors(const Gmm& gmm, const FeatureMatrix& frames);

// Per-frame argmax of the responsibilities.
std::vector<int> hard_assignments(const Gmm& gmm, const FeatureMatrix& frames);

struct EmOptions {
  CovarianceMode mode = CovarianceMode::Full;
  // Eigenvalue/variance floor as a fraction of the mean per-dimension data
  // variance.
  double floor_fraction = 1e-6;
};

struct EmResult {
  Gmm model;
  // Entry t = total data log-likelihood under the parameters entering
  // iteration t (non-decreasing within 1e-8 per step).
  std::vector<double> log_likelihoods;
  double covariance_floor = 0.0;
};

// EM training with k-means++ mean seeding, global-covariance initialization
// and uniform starting weights. Deterministic for a fixed seed. Runs exactly
// `iterations` E/M steps; collapsing mixtures are floored, never an error.
EmResult fit_em(const FeatureMatrix& frames, int mixtures, int iterations,
                std::uint64_t seed, const EmOptions& options = {});

// Same update loop started from an existing model. Component order is
// preserved (no re-sorting), so mixture correspondence survives refinement.
EmResult fit_em_from(const Gmm& init, const FeatureMatrix& frames,
                     int iterations, const EmOptions& options = {});

// Content fingerprint over mode, shape and raw parameter bytes. Used to tie
// transforms to the alignment model they were estimated against.
std::uint64_t gmm_hash(const Gmm& gmm);

// n i.i.d. draws; bit-reproducible for a fixed seed.
FeatureMatrix sample(const Gmm& gmm, int n, std::uint64_t seed);

// Draws plus the index of the generating mixture per frame.
struct LabelledSample {
  FeatureMatrix frames;
  std::vector<int> labels;
};
LabelledSample sample_labelled(const Gmm& gmm, int n, std::uint64_t seed);

}  // namespace splicekit
