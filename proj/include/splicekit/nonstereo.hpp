#pragma once

#include "splicekit/common.hpp"
#include "splicekit/gmm.hpp"
#include "splicekit/mllr.hpp"
#include "splicekit/transforms.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace splicekit {

enum class CorrespondenceMode { Soft, Hard };

// M x M co-assignment mass between clean mixtures (rows) and noisy mixtures
// (columns). Total mass equals the number of stereo pairs.
struct CorrespondenceMatrix {
  Eigen::MatrixXd v;
  CorrespondenceMode mode = CorrespondenceMode::Soft;

  // Column index of each row's largest entry.
  std::vector<int> row_argmax() const;
  // True when row_argmax is a bijection over mixtures.
  bool is_permutation() const;
  // Mass sitting on the row-argmax cells divided by the total.
  double permutation_mass_fraction() const;
};

CorrespondenceMatrix correspondence_matrix(const Gmm& clean_gmm, const Gmm& noisy_gmm,
                                           const StereoDataset& stereo,
                                           CorrespondenceMode mode);

struct BuildCleanResult {
  Gmm model;
  MllrTransform mllr;
  std::vector<double> em_log_likelihoods;
  double covariance_floor = 0.0;
};

// Mean-adapts the noisy GMM to the clean frames with a global MLLR transform,
// then refines with EM (at least three iterations). Component ordering is
// preserved end to end, so mixture i of the result corresponds to mixture i
// of the noisy model.
BuildCleanResult build_clean_gmm(const Gmm& noisy_gmm, const FeatureMatrix& clean_frames,
                                 int em_iterations, const MllrOptions& mllr_options = {},
                                 const WarningSink& warnings = {});

struct NonStereoOptions {
  int em_refine_iterations = 3;
  int gmm_iterations = 8;
  std::uint64_t seed = 0;
  EmOptions em;
  MllrOptions mllr;
};

struct NonStereoResult {
  PiecewiseTransform transform;
  Gmm noisy_gmm;
  Gmm clean_gmm;
  MllrTransform mllr;
};

// Full unpaired pipeline: train the noisy GMM, derive the mixture-
// corresponded clean GMM, then read whitening transforms straight off the two
// models' per-mixture statistics. The clean and noisy frame sets may have
// different sizes and need not be paired.
NonStereoResult estimate_nonstereo(const FeatureMatrix& noisy_frames,
                                   const FeatureMatrix& clean_frames, int mixtures,
                                   const NonStereoOptions& options = {},
                                   const WarningSink& warnings = {});

// The whitening read-off used by estimate_nonstereo, exposed for reuse:
// C_m from the two models' component covariances, d_m from their means.
// Mixtures whose clean covariance sits at the eigenvalue floor fall back to
// bias-only.
PiecewiseTransform msplice_from_models(const Gmm& clean_gmm, const Gmm& noisy_gmm,
                                       double clean_floor,
                                       const WarningSink& warnings = {});

}  // namespace splicekit
