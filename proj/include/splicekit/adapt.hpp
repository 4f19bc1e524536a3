#pragma once

#include "splicekit/common.hpp"
#include "splicekit/gmm.hpp"
#include "splicekit/mllr.hpp"
#include "splicekit/transforms.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace splicekit {

// A trained transform with biases re-estimated for one test condition.
// Matrices are shared unmodified from the base; only biases differ.
struct AdaptedTransform {
  PiecewiseTransform base;
  std::vector<Eigen::VectorXd> adapted_biases;
  MllrTransform mllr;
  std::string condition_tag;
};

// Estimates a global MLLR mean transform of the noisy GMM towards the test
// frames (all from one condition; grouping is the caller's concern), moves
// the mixture means and recomputes each bias from the stored clean means.
// No decoding, no matrix updates. Fewer than D+1 frames warns and takes the
// ridge-regularized path.
AdaptedTransform adapt_runtime(const PiecewiseTransform& base, const Gmm& noisy_gmm,
                               const std::vector<Eigen::VectorXd>& clean_means,
                               const FeatureMatrix& test_frames,
                               const std::string& condition_tag,
                               const MllrOptions& mllr_options = {},
                               const WarningSink& warnings = {});

struct EnhanceAdaptedOptions {
  // Alignments default to the original noisy GMM; set to score against the
  // MLLR-adapted model instead.
  bool use_adapted_gmm = false;
  // When set and different from the transform's tag, a mismatch warning is
  // emitted (applying a transform across conditions is permitted).
  std::optional<std::string> frames_condition_tag;
  bool force = false;
};

FeatureMatrix enhance_adapted(const AdaptedTransform& adapted, const Gmm& noisy_gmm,
                              const FeatureMatrix& frames,
                              const EnhanceAdaptedOptions& options = {},
                              const WarningSink& warnings = {});

}  // namespace splicekit
