#pragma once

#include "splicekit/common.hpp"
#include "splicekit/gmm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace splicekit {

// Frame-aligned clean/noisy feature pair set.
struct StereoDataset {
  FeatureMatrix clean;
  FeatureMatrix noisy;
};

// Throws UsageError unless both sides have identical shape and N,D >= 1.
void validate_stereo(const StereoDataset& stereo);

enum class TransformKind { Splice, MSplice, Diagonal, BiasOnly };

std::string to_string(TransformKind kind);
TransformKind transform_kind_from_string(const std::string& name);

// Per-mixture affine compensation tied to the noisy alignment GMM.
// BiasOnly keeps identity matrices; Diagonal keeps off-diagonals at zero.
struct PiecewiseTransform {
  TransformKind kind = TransformKind::Splice;
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<Eigen::VectorXd> biases;
  // Training-time clean mixture means, kept so run-time adaptation can
  // recompute biases later.
  std::vector<Eigen::VectorXd> clean_means;
  // Fingerprint of the alignment GMM the transform was estimated against.
  std::uint64_t alignment_hash = 0;

  int mixtures() const { return static_cast<int>(matrices.size()); }
  int dim() const { return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows()); }
};

// Throws NumericalError/UsageError if structural invariants are broken.
void validate_transform(const PiecewiseTransform& transform);

// What a mixture's occupancy allows us to estimate.
enum class MixtureHealth { Ok, BiasOnlyFallback, IdentityFallback };

// Whether second moments are mean-subtracted. Central is the default; Raw
// keeps plain weighted outer products for A/B comparison.
enum class SecondMomentForm { Central, Raw };

// Posterior-weighted per-mixture statistics of a stereo set, aligned with the
// noisy GMM. counts[m] is the posterior mass; covariances are floored SPD.
struct WeightedMoments {
  Eigen::VectorXd counts;
  std::vector<Eigen::VectorXd> mean_x, mean_y;
  std::vector<Eigen::MatrixXd> cov_x, cov_y, cov_xy;
  std::vector<MixtureHealth> health;
  SecondMomentForm form = SecondMomentForm::Central;
  double floor_x = 0.0, floor_y = 0.0;

  int mixtures() const { return static_cast<int>(counts.size()); }
};

// Posteriors are taken w.r.t. the noisy GMM only; values below 1e-12 are
// dropped from the sums. Mixtures with mass below D (below 1) are flagged
// for bias-only (identity) fallback.
WeightedMoments accumulate_moments(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                   SecondMomentForm form = SecondMomentForm::Central,
                                   const WarningSink& warnings = {});

// A_m = Sxy_m Sy_m^-1, b_m = mean_x - A_m mean_y.
PiecewiseTransform splice_from_moments(const WeightedMoments& moments,
                                       std::uint64_t alignment_hash,
                                       const WarningSink& warnings = {});

// C_m = Sx_m^{1/2} Sy_m^{-1/2}, d_m = mean_x - C_m mean_y.
PiecewiseTransform msplice_from_moments(const WeightedMoments& moments,
                                        std::uint64_t alignment_hash,
                                        const WarningSink& warnings = {});

// Identity matrices, biases = mean_x - mean_y.
PiecewiseTransform bias_only_from_moments(const WeightedMoments& moments,
                                          std::uint64_t alignment_hash);

// Per-dimension scale sxy_c/sy_c with matching bias; off-diagonals zero.
PiecewiseTransform diagonal_from_moments(const WeightedMoments& moments,
                                         std::uint64_t alignment_hash,
                                         const WarningSink& warnings = {});

PiecewiseTransform estimate_splice(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                   SecondMomentForm form = SecondMomentForm::Central,
                                   const WarningSink& warnings = {});
PiecewiseTransform estimate_msplice(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                    const WarningSink& warnings = {});
PiecewiseTransform estimate_bias_only(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                      const WarningSink& warnings = {});
PiecewiseTransform estimate_diagonal(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                     const WarningSink& warnings = {});

// x_hat_n = sum_m p(m|y_n) (M_m y_n + c_m). Refuses a transform whose
// alignment fingerprint does not match the GMM unless force is set.
FeatureMatrix enhance(const PiecewiseTransform& transform, const Gmm& noisy_gmm,
                      const FeatureMatrix& frames, bool force = false);

// Same combination rule with caller-supplied responsibilities; used for
// frozen-posterior checks and by the adapted path.
FeatureMatrix enhance_with_posteriors(const PiecewiseTransform& transform,
                                      const Eigen::MatrixXd& posteriors,
                                      const FeatureMatrix& frames);

// Mean squared error between two equally-shaped matrices, averaged over all
// entries' rows (per-frame squared distance averaged over frames).
double mean_squared_error(const FeatureMatrix& a, const FeatureMatrix& b);

}  // namespace splicekit
