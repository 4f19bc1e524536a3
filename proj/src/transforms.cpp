#include "splicekit/transforms.hpp"

#include "splicekit/linalg.hpp"
#include "splicekit/parallel.hpp"

#include <cmath>
#include <string>

namespace splicekit {

namespace {
// Posteriors below this are dropped from moment sums so partial reductions
// stay stable.
constexpr double kPosteriorFloor = 1e-12;
// Mass below which a mixture has effectively no data at all.
constexpr double kNoMass = 1e-12;
}  // namespace

void validate_stereo(const StereoDataset& stereo) {
  if (stereo.clean.rows() < 1 || stereo.clean.cols() < 1) {
    throw UsageError("stereo dataset: empty clean side");
  }
  if (stereo.clean.rows() != stereo.noisy.rows() ||
      stereo.clean.cols() != stereo.noisy.cols()) {
    throw UsageError("stereo dataset: clean and noisy sides differ in shape");
  }
  if (!stereo.clean.allFinite() || !stereo.noisy.allFinite()) {
    throw UsageError("stereo dataset: non-finite features");
  }
}

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Splice: return "splice";
    case TransformKind::MSplice: return "msplice";
    case TransformKind::Diagonal: return "diagonal";
    case TransformKind::BiasOnly: return "bias_only";
  }
  return "splice";
}

TransformKind transform_kind_from_string(const std::string& name) {
  if (name == "splice") return TransformKind::Splice;
  if (name == "msplice") return TransformKind::MSplice;
  if (name == "diagonal" || name == "diag") return TransformKind::Diagonal;
  if (name == "bias_only" || name == "bias") return TransformKind::BiasOnly;
  throw UsageError("unknown transform kind '" + name + "'");
}

void validate_transform(const PiecewiseTransform& transform) {
  const int m = transform.mixtures();
  if (m < 1) throw UsageError("transform: no mixtures");
  if (static_cast<int>(transform.biases.size()) != m) {
    throw UsageError("transform: matrix/bias count mismatch");
  }
  const int d = transform.dim();
  for (int j = 0; j < m; ++j) {
    const auto& a = transform.matrices[static_cast<std::size_t>(j)];
    const auto& b = transform.biases[static_cast<std::size_t>(j)];
    if (a.rows() != d || a.cols() != d || b.size() != d) {
      throw UsageError("transform: inconsistent dimensions at mixture " + std::to_string(j));
    }
    if (!a.allFinite() || !b.allFinite()) {
      throw NumericalError("transform: non-finite entries at mixture " + std::to_string(j));
    }
    if (transform.kind == TransformKind::BiasOnly &&
        !a.isApprox(Eigen::MatrixXd::Identity(d, d), 0.0)) {
      throw UsageError("transform: bias_only kind with non-identity matrix");
    }
    if (transform.kind == TransformKind::Diagonal &&
        (a - Eigen::MatrixXd(a.diagonal().asDiagonal())).cwiseAbs().maxCoeff() != 0.0) {
      throw UsageError("transform: diagonal kind with off-diagonal entries");
    }
  }
  if (!transform.clean_means.empty() &&
      static_cast<int>(transform.clean_means.size()) != m) {
    throw UsageError("transform: clean mean count mismatch");
  }
}

namespace {

struct MomentAccumulator {
  Eigen::VectorXd gamma;
  std::vector<Eigen::VectorXd> sum_x, sum_y;
  std::vector<Eigen::MatrixXd> sum_xx, sum_yy, sum_xy;
  bool initialized = false;

  void init(int m, int d) {
    gamma = Eigen::VectorXd::Zero(m);
    sum_x.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(d));
    sum_y.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(d));
    sum_xx.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(d, d));
    sum_yy.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(d, d));
    sum_xy.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(d, d));
    initialized = true;
  }

  void merge(const MomentAccumulator& other) {
    if (!other.initialized) return;
    if (!initialized) {
      *this = other;
      return;
    }
    gamma += other.gamma;
    for (std::size_t j = 0; j < sum_x.size(); ++j) {
      sum_x[j] += other.sum_x[j];
      sum_y[j] += other.sum_y[j];
      sum_xx[j] += other.sum_xx[j];
      sum_yy[j] += other.sum_yy[j];
      sum_xy[j] += other.sum_xy[j];
    }
  }
};

double mean_column_variance(const FeatureMatrix& frames) {
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  return (frames.rowwise() - mean).array().square().colwise().mean().mean();
}

}  // namespace

WeightedMoments accumulate_moments(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                   SecondMomentForm form, const WarningSink& warnings) {
  validate_stereo(stereo);
  if (noisy_gmm.dim() != stereo.noisy.cols()) {
    throw UsageError("accumulate_moments: GMM dimension does not match data");
  }
  const int m = noisy_gmm.mixtures();
  const int d = noisy_gmm.dim();
  const Eigen::MatrixXd post = posteriors(noisy_gmm, stereo.noisy);

  MomentAccumulator acc = chunked_reduce<MomentAccumulator>(
      static_cast<std::size_t>(stereo.noisy.rows()),
      [&](MomentAccumulator& a, std::size_t b, std::size_t e) {
        a.init(m, d);
        for (std::size_t row = b; row < e; ++row) {
          const Eigen::Index i = static_cast<Eigen::Index>(row);
          const Eigen::VectorXd x = stereo.clean.row(i).transpose();
          const Eigen::VectorXd y = stereo.noisy.row(i).transpose();
          for (int j = 0; j < m; ++j) {
            const double p = post(i, j);
            if (p < kPosteriorFloor) continue;
            a.gamma[j] += p;
            a.sum_x[static_cast<std::size_t>(j)] += p * x;
            a.sum_y[static_cast<std::size_t>(j)] += p * y;
            a.sum_xx[static_cast<std::size_t>(j)].noalias() += p * x * x.transpose();
            a.sum_yy[static_cast<std::size_t>(j)].noalias() += p * y * y.transpose();
            a.sum_xy[static_cast<std::size_t>(j)].noalias() += p * x * y.transpose();
          }
        }
      },
      [](MomentAccumulator& total, const MomentAccumulator& p) { total.merge(p); });

  WeightedMoments out;
  out.form = form;
  out.counts = acc.gamma;
  out.floor_x = std::max(1e-6 * mean_column_variance(stereo.clean), 1e-12);
  out.floor_y = std::max(1e-6 * mean_column_variance(stereo.noisy), 1e-12);
  out.mean_x.resize(static_cast<std::size_t>(m));
  out.mean_y.resize(static_cast<std::size_t>(m));
  out.cov_x.resize(static_cast<std::size_t>(m));
  out.cov_y.resize(static_cast<std::size_t>(m));
  out.cov_xy.resize(static_cast<std::size_t>(m));
  out.health.resize(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const std::size_t s = static_cast<std::size_t>(j);
    const double mass = acc.gamma[j];
    if (mass < kNoMass) {
      out.mean_x[s] = Eigen::VectorXd::Zero(d);
      out.mean_y[s] = Eigen::VectorXd::Zero(d);
      out.cov_x[s] = out.floor_x * Eigen::MatrixXd::Identity(d, d);
      out.cov_y[s] = out.floor_y * Eigen::MatrixXd::Identity(d, d);
      out.cov_xy[s] = Eigen::MatrixXd::Zero(d, d);
      out.health[s] = MixtureHealth::IdentityFallback;
      emit_warning(warnings, "mixture " + std::to_string(j) +
                                 " has no posterior mass; falling back to identity");
      continue;
    }
    out.mean_x[s] = acc.sum_x[s] / mass;
    out.mean_y[s] = acc.sum_y[s] / mass;
    Eigen::MatrixXd xx = acc.sum_xx[s] / mass;
    Eigen::MatrixXd yy = acc.sum_yy[s] / mass;
    Eigen::MatrixXd xy = acc.sum_xy[s] / mass;
    if (form == SecondMomentForm::Central) {
      xx -= out.mean_x[s] * out.mean_x[s].transpose();
      yy -= out.mean_y[s] * out.mean_y[s].transpose();
      xy -= out.mean_x[s] * out.mean_y[s].transpose();
    }
    out.cov_x[s] = floor_spd(symmetrize(xx), out.floor_x);
    out.cov_y[s] = floor_spd(symmetrize(yy), out.floor_y);
    out.cov_xy[s] = xy;
    if (mass < 1.0) {
      out.health[s] = MixtureHealth::IdentityFallback;
      emit_warning(warnings, "mixture " + std::to_string(j) + " has posterior mass " +
                                 std::to_string(mass) + " < 1; falling back to identity");
    } else if (mass < static_cast<double>(d)) {
      out.health[s] = MixtureHealth::BiasOnlyFallback;
      emit_warning(warnings, "mixture " + std::to_string(j) + " has posterior mass " +
                                 std::to_string(mass) + " < dimension " + std::to_string(d) +
                                 "; falling back to bias-only");
    } else {
      out.health[s] = MixtureHealth::Ok;
    }
  }
  return out;
}

namespace {

void fill_fallback(PiecewiseTransform& t, const WeightedMoments& moments, int j) {
  const int d = static_cast<int>(moments.mean_x.front().size());
  const std::size_t s = static_cast<std::size_t>(j);
  t.matrices[s] = Eigen::MatrixXd::Identity(d, d);
  if (moments.health[s] == MixtureHealth::IdentityFallback) {
    t.biases[s] = Eigen::VectorXd::Zero(d);
  } else {
    t.biases[s] = moments.mean_x[s] - moments.mean_y[s];
  }
}

PiecewiseTransform blank_transform(const WeightedMoments& moments, TransformKind kind,
                                   std::uint64_t alignment_hash) {
  PiecewiseTransform t;
  t.kind = kind;
  t.alignment_hash = alignment_hash;
  const std::size_t m = static_cast<std::size_t>(moments.mixtures());
  t.matrices.resize(m);
  t.biases.resize(m);
  t.clean_means = moments.mean_x;
  return t;
}

}  // namespace

PiecewiseTransform splice_from_moments(const WeightedMoments& moments,
                                       std::uint64_t alignment_hash,
                                       const WarningSink& warnings) {
  PiecewiseTransform t = blank_transform(moments, TransformKind::Splice, alignment_hash);
  for (int j = 0; j < moments.mixtures(); ++j) {
    const std::size_t s = static_cast<std::size_t>(j);
    if (moments.health[s] != MixtureHealth::Ok) {
      fill_fallback(t, moments, j);
      continue;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(moments.cov_y[s]);
    Eigen::MatrixXd a = ldlt.solve(moments.cov_xy[s].transpose()).transpose();
    if (ldlt.info() != Eigen::Success || !a.allFinite()) {
      emit_warning(warnings, "mixture " + std::to_string(j) +
                                 ": noisy covariance rank-deficient; falling back to bias-only");
      fill_fallback(t, moments, j);
      continue;
    }
    t.matrices[s] = std::move(a);
    t.biases[s] = moments.mean_x[s] - t.matrices[s] * moments.mean_y[s];
  }
  return t;
}

PiecewiseTransform msplice_from_moments(const WeightedMoments& moments,
                                        std::uint64_t alignment_hash,
                                        const WarningSink& warnings) {
  PiecewiseTransform t = blank_transform(moments, TransformKind::MSplice, alignment_hash);
  for (int j = 0; j < moments.mixtures(); ++j) {
    const std::size_t s = static_cast<std::size_t>(j);
    if (moments.health[s] != MixtureHealth::Ok) {
      fill_fallback(t, moments, j);
      continue;
    }
    Eigen::MatrixXd c = spd_sqrt(moments.cov_x[s]) * spd_inv_sqrt(moments.cov_y[s]);
    if (!c.allFinite()) {
      emit_warning(warnings, "mixture " + std::to_string(j) +
                                 ": whitening map not finite; falling back to bias-only");
      fill_fallback(t, moments, j);
      continue;
    }
    t.matrices[s] = std::move(c);
    t.biases[s] = moments.mean_x[s] - t.matrices[s] * moments.mean_y[s];
  }
  return t;
}

PiecewiseTransform bias_only_from_moments(const WeightedMoments& moments,
                                          std::uint64_t alignment_hash) {
  PiecewiseTransform t = blank_transform(moments, TransformKind::BiasOnly, alignment_hash);
  for (int j = 0; j < moments.mixtures(); ++j) fill_fallback(t, moments, j);
  return t;
}

PiecewiseTransform diagonal_from_moments(const WeightedMoments& moments,
                                         std::uint64_t alignment_hash,
                                         const WarningSink& warnings) {
  (void)warnings;
  PiecewiseTransform t = blank_transform(moments, TransformKind::Diagonal, alignment_hash);
  const int d = static_cast<int>(moments.mean_x.front().size());
  for (int j = 0; j < moments.mixtures(); ++j) {
    const std::size_t s = static_cast<std::size_t>(j);
    if (moments.health[s] != MixtureHealth::Ok) {
      fill_fallback(t, moments, j);
      continue;
    }
    Eigen::VectorXd scale(d);
    for (int c = 0; c < d; ++c) {
      scale[c] = moments.cov_xy[s](c, c) / moments.cov_y[s](c, c);
    }
    t.matrices[s] = Eigen::MatrixXd(scale.asDiagonal());
    t.biases[s] = moments.mean_x[s] - scale.cwiseProduct(moments.mean_y[s]);
  }
  return t;
}

PiecewiseTransform estimate_splice(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                   SecondMomentForm form, const WarningSink& warnings) {
  return splice_from_moments(accumulate_moments(stereo, noisy_gmm, form, warnings),
                             gmm_hash(noisy_gmm), warnings);
}

PiecewiseTransform estimate_msplice(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                    const WarningSink& warnings) {
  return msplice_from_moments(
      accumulate_moments(stereo, noisy_gmm, SecondMomentForm::Central, warnings),
      gmm_hash(noisy_gmm), warnings);
}

PiecewiseTransform estimate_bias_only(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                      const WarningSink& warnings) {
  return bias_only_from_moments(
      accumulate_moments(stereo, noisy_gmm, SecondMomentForm::Central, warnings),
      gmm_hash(noisy_gmm));
}

PiecewiseTransform estimate_diagonal(const StereoDataset& stereo, const Gmm& noisy_gmm,
                                     const WarningSink& warnings) {
  return diagonal_from_moments(
      accumulate_moments(stereo, noisy_gmm, SecondMomentForm::Central, warnings),
      gmm_hash(noisy_gmm), warnings);
}

FeatureMatrix enhance(const PiecewiseTransform& transform, const Gmm& noisy_gmm,
                      const FeatureMatrix& frames, bool force) {
  if (transform.dim() != noisy_gmm.dim() || transform.mixtures() != noisy_gmm.mixtures()) {
    throw UsageError("enhance: transform and GMM disagree on shape");
  }
  if (!force && transform.alignment_hash != 0 &&
      transform.alignment_hash != gmm_hash(noisy_gmm)) {
    throw UsageError("enhance: alignment model hash mismatch (pass force to override)");
  }
  return enhance_with_posteriors(transform, posteriors(noisy_gmm, frames), frames);
}

FeatureMatrix enhance_with_posteriors(const PiecewiseTransform& transform,
                                      const Eigen::MatrixXd& post,
                                      const FeatureMatrix& frames) {
  const int d = transform.dim();
  const int m = transform.mixtures();
  if (frames.cols() != d) throw UsageError("enhance: frame dimension mismatch");
  if (post.rows() != frames.rows() || post.cols() != m) {
    throw UsageError("enhance: posterior matrix shape mismatch");
  }
  FeatureMatrix out = FeatureMatrix::Zero(frames.rows(), d);
  FeatureMatrix mapped(frames.rows(), d);
  for (int j = 0; j < m; ++j) {
    const std::size_t s = static_cast<std::size_t>(j);
    mapped.noalias() = frames * transform.matrices[s].transpose();
    mapped.rowwise() += transform.biases[s].transpose();
    out += post.col(j).asDiagonal() * mapped;
  }
  return out;
}

double mean_squared_error(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw UsageError("mean_squared_error: shape mismatch");
  }
  return (a - b).rowwise().squaredNorm().mean();
}

}  // namespace splicekit
