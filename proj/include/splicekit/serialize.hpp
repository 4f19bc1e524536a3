#pragma once

#include "splicekit/adapt.hpp"
#include "splicekit/common.hpp"
#include "splicekit/gmm.hpp"
#include "splicekit/nonstereo.hpp"
#include "splicekit/synthetic.hpp"
#include "splicekit/transforms.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace splicekit {

// All model files are line-oriented text with a magic+version first line.
// Doubles are written in shortest round-trip form, so save/load is exact and
// equal models serialize to identical bytes.

std::string serialize_gmm(const Gmm& gmm);
Gmm parse_gmm(const std::string& text, const std::string& origin = "<memory>");
void save_gmm(const Gmm& gmm, const std::filesystem::path& path);
Gmm load_gmm(const std::filesystem::path& path);

std::string serialize_transform(const PiecewiseTransform& transform);
PiecewiseTransform parse_transform(const std::string& text,
                                   const std::string& origin = "<memory>");
void save_transform(const PiecewiseTransform& transform, const std::filesystem::path& path);

// With expect_alignment set, refuses a file whose alignment hash mismatches
// the GMM unless force is given (a warning is emitted instead).
PiecewiseTransform load_transform(const std::filesystem::path& path,
                                  const Gmm* expect_alignment = nullptr, bool force = false,
                                  const WarningSink& warnings = {});

std::string serialize_adapted(const AdaptedTransform& adapted);
AdaptedTransform parse_adapted(const std::string& text, const std::string& origin = "<memory>");
void save_adapted(const AdaptedTransform& adapted, const std::filesystem::path& path);
AdaptedTransform load_adapted(const std::filesystem::path& path,
                              const Gmm* expect_alignment = nullptr, bool force = false,
                              const WarningSink& warnings = {});

// Dense numeric grid with a one-line header: "# M=<m> mode=<soft|hard> N=<n>".
void save_correspondence(const CorrespondenceMatrix& matrix, double total_mass,
                         const std::filesystem::path& path);
CorrespondenceMatrix load_correspondence(const std::filesystem::path& path);

// Ground-truth channel maps of a synthetic corpus (JSON).
void save_oracle(const SyntheticCorpus& corpus, const SyntheticSpec& spec,
                 const std::filesystem::path& path);
struct OracleMaps {
  std::vector<Eigen::MatrixXd> inverse_matrices;
  std::vector<Eigen::VectorXd> inverse_biases;
  std::vector<Eigen::MatrixXd> channel_matrices;
  std::vector<Eigen::VectorXd> channel_biases;
};
OracleMaps load_oracle(const std::filesystem::path& path);

// Shortest round-trip decimal form of a double (to_chars).
std::string format_double(double value);

}  // namespace splicekit
