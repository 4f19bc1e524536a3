#pragma once

#include "splicekit/common.hpp"
#include "splicekit/gmm.hpp"
#include "splicekit/transforms.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace splicekit {

// How the per-mixture channel maps are produced.
enum class ChannelMode {
  Identity,  // G = I, h = 0
  Random,    // random SPD matrices around the identity plus random biases
  Explicit,  // caller-supplied maps
};

struct ChannelSpec {
  ChannelMode mode = ChannelMode::Random;
  // Random mode: G_m = Q diag(u) Q^T with u in [1 - spread, 1 + spread],
  // optionally sharing one basis across mixtures (per_mixture_basis=false
  // keeps the maps globally similar, which a single global mean transform can
  // track).
  double scale_spread = 0.4;
  bool per_mixture_basis = true;
  // h_m = global bias (norm ~ global_bias_scale) + per-mixture jitter.
  double global_bias_scale = 3.0;
  double bias_jitter = 0.5;
  // Explicit mode.
  std::vector<Eigen::MatrixXd> matrices;
  std::vector<Eigen::VectorXd> biases;
};

struct SyntheticSpec {
  int dims = 13;
  int mixtures = 8;
  // Minimum mean gap between clusters as a multiple of the largest component
  // standard deviation.
  double separation = 10.0;
  double residual_sigma = 0.0;
  std::int64_t n_frames = 50000;
  std::uint64_t seed = 0;
  ChannelSpec channel;
};

void validate_spec(const SyntheticSpec& spec);

// JSON schema documented in the README; unknown keys are rejected.
SyntheticSpec spec_from_json(const std::string& json_text);
SyntheticSpec read_spec(const std::filesystem::path& path);
std::string spec_to_json(const SyntheticSpec& spec);

struct SyntheticCorpus {
  StereoDataset stereo;
  Gmm clean_model;
  std::vector<int> labels;  // generating mixture per frame
  std::vector<Eigen::MatrixXd> channel_matrices;   // G_m
  std::vector<Eigen::VectorXd> channel_biases;     // h_m
  std::vector<Eigen::MatrixXd> inverse_matrices;   // G_m^-1
  std::vector<Eigen::VectorXd> inverse_biases;     // -G_m^-1 h_m
};

// x_n drawn from the clean model, y_n = G_m x_n + h_m + eps with
// eps ~ N(0, residual_sigma^2 I). The analytic inverse maps are the oracle
// answers for every noisy->clean estimator. Deterministic per seed.
SyntheticCorpus generate(const SyntheticSpec& spec);

// Disjoint random halves: the clean side of one half and the noisy side of
// the other, sized ceil(N/2) and floor(N/2). No frame index appears on both
// sides.
struct UnpairedSplit {
  FeatureMatrix clean;
  FeatureMatrix noisy;
  std::vector<std::size_t> clean_rows;  // source indices, for tests
  std::vector<std::size_t> noisy_rows;
};
UnpairedSplit split_unpaired(const StereoDataset& stereo, std::uint64_t seed);

}  // namespace splicekit
