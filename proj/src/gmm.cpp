#include "splicekit/gmm.hpp"

#include "splicekit/linalg.hpp"
#include "splicekit/parallel.hpp"
#include "splicekit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <string>

namespace splicekit {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
// Below this posterior mass a mixture keeps its previous parameters.
constexpr double kEmptyMixtureMass = 1e-8;
constexpr double kWeightFloor = 1e-12;

void check_dim(int expected, int got, const char* what) {
  if (expected != got) {
    throw UsageError(std::string(what) + ": dimension mismatch (" +
                     std::to_string(got) + " vs model " + std::to_string(expected) + ")");
  }
}

}  // namespace

Gaussian::Gaussian(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mode_(CovarianceMode::Full), mean_(std::move(mean)), covariance_(std::move(covariance)) {
  if (mean_.size() < 1) throw UsageError("Gaussian: empty mean");
  if (covariance_.rows() != covariance_.cols() || covariance_.rows() != mean_.size()) {
    throw UsageError("Gaussian: covariance shape does not match mean dimension");
  }
  if (!mean_.allFinite() || !covariance_.allFinite()) {
    throw NumericalError("Gaussian: non-finite parameters");
  }
  if (relative_asymmetry(covariance_) > 1e-12) {
    throw NumericalError("Gaussian: covariance asymmetric beyond 1e-12 relative");
  }
  covariance_ = symmetrize(covariance_);
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("Gaussian: covariance not positive definite");
  }
  chol_lower_ = llt.matrixL();
  const double log_det = 2.0 * chol_lower_.diagonal().array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det);
}

Gaussian::Gaussian(Eigen::VectorXd mean, Eigen::VectorXd variances)
    : mode_(CovarianceMode::Diagonal), mean_(std::move(mean)), variances_(std::move(variances)) {
  if (mean_.size() < 1) throw UsageError("Gaussian: empty mean");
  if (variances_.size() != mean_.size()) {
    throw UsageError("Gaussian: variance vector does not match mean dimension");
  }
  if (!mean_.allFinite() || !variances_.allFinite()) {
    throw NumericalError("Gaussian: non-finite parameters");
  }
  if ((variances_.array() <= 0.0).any()) {
    throw NumericalError("Gaussian: non-positive variance");
  }
  inv_variances_ = variances_.cwiseInverse();
  const double log_det = variances_.array().log().sum();
  log_norm_ = -0.5 * (static_cast<double>(dim()) * kLog2Pi + log_det);
}

const Eigen::MatrixXd& Gaussian::covariance() const {
  if (mode_ != CovarianceMode::Full) {
    throw UsageError("Gaussian: covariance() called on a diagonal component");
  }
  return covariance_;
}

const Eigen::VectorXd& Gaussian::variances() const {
  if (mode_ != CovarianceMode::Diagonal) {
    throw UsageError("Gaussian: variances() called on a full component");
  }
  return variances_;
}

Eigen::MatrixXd Gaussian::covariance_matrix() const {
  if (mode_ == CovarianceMode::Full) return covariance_;
  return variances_.asDiagonal();
}

double Gaussian::log_density(const Eigen::VectorXd& x) const {
  check_dim(dim(), static_cast<int>(x.size()), "log_density");
  if (mode_ == CovarianceMode::Full) {
    Eigen::VectorXd z = chol_lower_.triangularView<Eigen::Lower>().solve(x - mean_);
    return log_norm_ - 0.5 * z.squaredNorm();
  }
  const Eigen::ArrayXd diff = (x - mean_).array();
  return log_norm_ - 0.5 * (diff.square() * inv_variances_.array()).sum();
}

double Gaussian::min_covariance_eigenvalue() const {
  if (mode_ == CovarianceMode::Diagonal) return variances_.minCoeff();
  return min_eigenvalue(covariance_);
}

Gmm::Gmm(Eigen::VectorXd weights, std::vector<Gaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  if (components_.empty()) throw UsageError("Gmm: needs at least one component");
  if (weights_.size() != static_cast<Eigen::Index>(components_.size())) {
    throw UsageError("Gmm: weight count does not match component count");
  }
  if ((weights_.array() < 0.0).any()) throw UsageError("Gmm: negative weight");
  if (std::abs(weights_.sum() - 1.0) > 1e-10) {
    throw UsageError("Gmm: weights sum to " + std::to_string(weights_.sum()) +
                     ", expected 1 within 1e-10");
  }
  const int d = components_.front().dim();
  const CovarianceMode mode = components_.front().mode();
  for (const auto& c : components_) {
    if (c.dim() != d) throw UsageError("Gmm: components disagree on dimension");
    if (c.mode() != mode) throw UsageError("Gmm: components disagree on storage mode");
  }
}

namespace {

// Per-frame component log-terms log w_m + log p(y|m) into `terms` (size M).
void component_log_terms(const Gmm& gmm, const Eigen::VectorXd& frame,
                         Eigen::VectorXd& terms) {
  const int m = gmm.mixtures();
  for (int j = 0; j < m; ++j) {
    const double w = gmm.weights()[j];
    terms[j] = (w > 0.0 ? std::log(w) : -std::numeric_limits<double>::infinity()) +
               gmm.component(j).log_density(frame);
  }
}

double log_sum_exp(const Eigen::VectorXd& terms) {
  const double top = terms.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((terms.array() - top).exp().sum());
}

}  // namespace

double log_density(const Gmm& gmm, const Eigen::VectorXd& frame) {
  check_dim(gmm.dim(), static_cast<int>(frame.size()), "log_density");
  Eigen::VectorXd terms(gmm.mixtures());
  component_log_terms(gmm, frame, terms);
  return log_sum_exp(terms);
}

double log_likelihood(const Gmm& gmm, const FeatureMatrix& frames) {
  check_dim(gmm.dim(), static_cast<int>(frames.cols()), "log_likelihood");
  struct Partial {
    double sum = 0.0;
    bool used = false;
  };
  Partial total = chunked_reduce<Partial>(
      static_cast<std::size_t>(frames.rows()),
      [&](Partial& p, std::size_t b, std::size_t e) {
        Eigen::VectorXd terms(gmm.mixtures());
        for (std::size_t n = b; n < e; ++n) {
          component_log_terms(gmm, frames.row(static_cast<Eigen::Index>(n)).transpose(), terms);
          p.sum += log_sum_exp(terms);
        }
        p.used = true;
      },
      [](Partial& acc, const Partial& p) { acc.sum += p.sum; });
  return total.sum;
}

Eigen::MatrixXd posteriors(const Gmm& gmm, const FeatureMatrix& frames) {
  check_dim(gmm.dim(), static_cast<int>(frames.cols()), "posteriors");
  const Eigen::Index n = frames.rows();
  const int m = gmm.mixtures();
  Eigen::MatrixXd result(n, m);
  for_each_chunk(static_cast<std::size_t>(n), kDefaultChunk,
                 [&](std::size_t, std::size_t b, std::size_t e) {
                   Eigen::VectorXd terms(m);
                   for (std::size_t row = b; row < e; ++row) {
                     const Eigen::Index i = static_cast<Eigen::Index>(row);
                     component_log_terms(gmm, frames.row(i).transpose(), terms);
                     const double lse = log_sum_exp(terms);
                     for (int j = 0; j < m; ++j) {
                       result(i, j) = std::exp(terms[j] - lse);
                     }
                   }
                 });
  return result;
}

std::vector<int> hard_assignments(const Gmm& gmm, const FeatureMatrix& frames) {
  check_dim(gmm.dim(), static_cast<int>(frames.cols()), "hard_assignments");
  std::vector<int> labels(static_cast<std::size_t>(frames.rows()));
  for_each_chunk(static_cast<std::size_t>(frames.rows()), kDefaultChunk,
                 [&](std::size_t, std::size_t b, std::size_t e) {
                   Eigen::VectorXd terms(gmm.mixtures());
                   for (std::size_t row = b; row < e; ++row) {
                     component_log_terms(
                         gmm, frames.row(static_cast<Eigen::Index>(row)).transpose(), terms);
                     Eigen::Index best = 0;
                     terms.maxCoeff(&best);
                     labels[row] = static_cast<int>(best);
                   }
                 });
  return labels;
}

namespace {

double covariance_floor_for(const FeatureMatrix& frames, double fraction) {
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  const double mean_variance =
      (frames.rowwise() - mean).array().square().colwise().mean().mean();
  return std::max(fraction * mean_variance, 1e-12);
}

// k-means++ seeding: spread starting means across the data.
std::vector<Eigen::VectorXd> seed_means(const FeatureMatrix& frames, int m, Rng& rng) {
  const Eigen::Index n = frames.rows();
  std::vector<Eigen::VectorXd> means;
  means.reserve(static_cast<std::size_t>(m));
  means.push_back(frames.row(static_cast<Eigen::Index>(rng.pick_index(
                                 static_cast<std::size_t>(n))))
                      .transpose());
  Eigen::VectorXd dist2 =
      (frames.rowwise() - means.back().transpose()).rowwise().squaredNorm();
  std::vector<double> weights(static_cast<std::size_t>(n));
  while (static_cast<int>(means.size()) < m) {
    for (Eigen::Index i = 0; i < n; ++i) weights[static_cast<std::size_t>(i)] = dist2[i];
    const std::size_t pick = rng.pick_weighted(weights);
    means.push_back(frames.row(static_cast<Eigen::Index>(pick)).transpose());
    dist2 = dist2.cwiseMin(
        (frames.rowwise() - means.back().transpose()).rowwise().squaredNorm());
  }
  return means;
}

struct EmAccumulator {
  double loglik = 0.0;
  Eigen::VectorXd gamma;
  std::vector<Eigen::VectorXd> first;
  std::vector<Eigen::MatrixXd> second_full;
  std::vector<Eigen::VectorXd> second_diag;
  bool initialized = false;

  void init(int m, int d, CovarianceMode mode) {
    gamma = Eigen::VectorXd::Zero(m);
    first.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(d));
    if (mode == CovarianceMode::Full) {
      second_full.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(d, d));
    } else {
      second_diag.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(d));
    }
    initialized = true;
  }

  void merge(const EmAccumulator& other) {
    if (!other.initialized) return;
    if (!initialized) {
      *this = other;
      return;
    }
    loglik += other.loglik;
    gamma += other.gamma;
    for (std::size_t j = 0; j < first.size(); ++j) first[j] += other.first[j];
    for (std::size_t j = 0; j < second_full.size(); ++j) second_full[j] += other.second_full[j];
    for (std::size_t j = 0; j < second_diag.size(); ++j) second_diag[j] += other.second_diag[j];
  }
};

EmAccumulator accumulate_em_stats(const Gmm& model, const FeatureMatrix& frames) {
  const int m = model.mixtures();
  const int d = model.dim();
  const CovarianceMode mode = model.mode();
  return chunked_reduce<EmAccumulator>(
      static_cast<std::size_t>(frames.rows()),
      [&](EmAccumulator& acc, std::size_t b, std::size_t e) {
        acc.init(m, d, mode);
        Eigen::VectorXd terms(m);
        for (std::size_t row = b; row < e; ++row) {
          const Eigen::VectorXd y = frames.row(static_cast<Eigen::Index>(row)).transpose();
          component_log_terms(model, y, terms);
          const double lse = log_sum_exp(terms);
          acc.loglik += lse;
          for (int j = 0; j < m; ++j) {
            const double p = std::exp(terms[j] - lse);
            if (p <= 0.0) continue;
            acc.gamma[j] += p;
            acc.first[static_cast<std::size_t>(j)] += p * y;
            if (mode == CovarianceMode::Full) {
              acc.second_full[static_cast<std::size_t>(j)].noalias() += p * y * y.transpose();
            } else {
              acc.second_diag[static_cast<std::size_t>(j)] += p * y.cwiseAbs2();
            }
          }
        }
      },
      [](EmAccumulator& total, const EmAccumulator& p) { total.merge(p); });
}

Gmm em_update(const Gmm& model, const EmAccumulator& stats, double n_frames, double floor) {
  const int m = model.mixtures();
  const CovarianceMode mode = model.mode();
  Eigen::VectorXd weights(m);
  std::vector<Gaussian> components;
  components.reserve(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) {
    const double mass = stats.gamma[j];
    weights[j] = std::max(mass / n_frames, kWeightFloor);
    if (mass < kEmptyMixtureMass) {
      components.push_back(model.component(j));
      continue;
    }
    Eigen::VectorXd mean = stats.first[static_cast<std::size_t>(j)] / mass;
    if (mode == CovarianceMode::Full) {
      Eigen::MatrixXd cov =
          stats.second_full[static_cast<std::size_t>(j)] / mass - mean * mean.transpose();
      components.emplace_back(std::move(mean), floor_spd(symmetrize(cov), floor));
    } else {
      Eigen::VectorXd var = (stats.second_diag[static_cast<std::size_t>(j)] / mass -
                             mean.cwiseAbs2())
                                .cwiseMax(floor);
      components.emplace_back(std::move(mean), std::move(var));
    }
  }
  weights /= weights.sum();
  return Gmm(std::move(weights), std::move(components));
}

EmResult run_em(Gmm model, const FeatureMatrix& frames, int iterations, double floor) {
  EmResult result{std::move(model), {}, floor};
  const double n = static_cast<double>(frames.rows());
  for (int it = 0; it < iterations; ++it) {
    EmAccumulator stats = accumulate_em_stats(result.model, frames);
    result.log_likelihoods.push_back(stats.loglik);
    result.model = em_update(result.model, stats, n, floor);
  }
  return result;
}

}  // namespace

EmResult fit_em(const FeatureMatrix& frames, int mixtures, int iterations,
                std::uint64_t seed, const EmOptions& options) {
  if (frames.rows() < 1 || frames.cols() < 1) throw UsageError("fit_em: empty data");
  if (!frames.allFinite()) throw UsageError("fit_em: non-finite features");
  if (mixtures < 1) throw UsageError("fit_em: mixture count must be >= 1");
  if (iterations < 1) throw UsageError("fit_em: iteration count must be >= 1");
  if (frames.rows() < mixtures) {
    throw UsageError("fit_em: fewer frames (" + std::to_string(frames.rows()) +
                     ") than mixtures (" + std::to_string(mixtures) + ")");
  }
  const int d = static_cast<int>(frames.cols());
  const double floor = covariance_floor_for(frames, options.floor_fraction);

  Rng rng(seed);
  std::vector<Eigen::VectorXd> means = seed_means(frames, mixtures, rng);
  const Eigen::RowVectorXd global_mean = frames.colwise().mean();
  const FeatureMatrix centered = frames.rowwise() - global_mean;
  Eigen::MatrixXd global_cov =
      symmetrize((centered.transpose() * centered) / static_cast<double>(frames.rows()));
  global_cov = floor_spd(global_cov, floor);

  Eigen::VectorXd weights = Eigen::VectorXd::Constant(mixtures, 1.0 / mixtures);
  std::vector<Gaussian> components;
  components.reserve(static_cast<std::size_t>(mixtures));
  for (int j = 0; j < mixtures; ++j) {
    if (options.mode == CovarianceMode::Full) {
      components.emplace_back(means[static_cast<std::size_t>(j)], global_cov);
    } else {
      components.emplace_back(means[static_cast<std::size_t>(j)],
                              Eigen::VectorXd(global_cov.diagonal().cwiseMax(floor)));
    }
  }
  (void)d;
  return run_em(Gmm(std::move(weights), std::move(components)), frames, iterations, floor);
}

EmResult fit_em_from(const Gmm& init, const FeatureMatrix& frames, int iterations,
                     const EmOptions& options) {
  if (frames.rows() < 1) throw UsageError("fit_em_from: empty data");
  if (!frames.allFinite()) throw UsageError("fit_em_from: non-finite features");
  check_dim(init.dim(), static_cast<int>(frames.cols()), "fit_em_from");
  if (iterations < 1) throw UsageError("fit_em_from: iteration count must be >= 1");
  const double floor = covariance_floor_for(frames, options.floor_fraction);
  return run_em(init, frames, iterations, floor);
}

std::uint64_t gmm_hash(const Gmm& gmm) {
  std::string bytes;
  auto push_u64 = [&bytes](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto push_double = [&](double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    push_u64(bits);
  };
  push_u64(gmm.mode() == CovarianceMode::Full ? 1 : 2);
  push_u64(static_cast<std::uint64_t>(gmm.mixtures()));
  push_u64(static_cast<std::uint64_t>(gmm.dim()));
  for (int j = 0; j < gmm.mixtures(); ++j) push_double(gmm.weights()[j]);
  for (int j = 0; j < gmm.mixtures(); ++j) {
    const Gaussian& c = gmm.component(j);
    for (int k = 0; k < c.dim(); ++k) push_double(c.mean()[k]);
    if (c.mode() == CovarianceMode::Full) {
      for (int r = 0; r < c.dim(); ++r)
        for (int s = 0; s < c.dim(); ++s) push_double(c.covariance()(r, s));
    } else {
      for (int k = 0; k < c.dim(); ++k) push_double(c.variances()[k]);
    }
  }
  return fnv1a64(bytes);
}

FeatureMatrix sample(const Gmm& gmm, int n, std::uint64_t seed) {
  return sample_labelled(gmm, n, seed).frames;
}

LabelledSample sample_labelled(const Gmm& gmm, int n, std::uint64_t seed) {
  if (n < 1) throw UsageError("sample: need at least one draw");
  const int d = gmm.dim();
  const int m = gmm.mixtures();
  Rng rng(seed);
  std::vector<double> weights(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) weights[static_cast<std::size_t>(j)] = gmm.weights()[j];

  // Cholesky factors for full components, std deviations for diagonal ones.
  std::vector<Eigen::MatrixXd> chol;
  std::vector<Eigen::VectorXd> stddev;
  if (gmm.mode() == CovarianceMode::Full) {
    chol.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
      chol.push_back(Eigen::LLT<Eigen::MatrixXd>(gmm.component(j).covariance()).matrixL());
    }
  } else {
    stddev.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) stddev.push_back(gmm.component(j).variances().cwiseSqrt());
  }

  LabelledSample out;
  out.frames.resize(n, d);
  out.labels.resize(static_cast<std::size_t>(n));
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    const int j = static_cast<int>(rng.pick_weighted(weights));
    out.labels[static_cast<std::size_t>(i)] = j;
    for (int k = 0; k < d; ++k) z[k] = rng.gaussian();
    if (gmm.mode() == CovarianceMode::Full) {
      out.frames.row(i) =
          (gmm.component(j).mean() + chol[static_cast<std::size_t>(j)] * z).transpose();
    } else {
      out.frames.row(i) =
          (gmm.component(j).mean().array() + stddev[static_cast<std::size_t>(j)].array() * z.array())
              .transpose();
    }
  }
  return out;
}

}  // namespace splicekit
