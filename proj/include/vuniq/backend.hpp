// vuniq/backend.hpp

// Copyright 2026  The vuniq Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef VUNIQ_BACKEND_HPP_
#define VUNIQ_BACKEND_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"
#include "vuniq/gaussian.hpp"
#include "vuniq/quantizer.hpp"
#include "vuniq/rng.hpp"

namespace vuniq {

// Two-covariance PLDA: x = F h + eps with h ~ N(0, I) per speaker and
// eps ~ N(0, W) per sample; the model mean is fixed at zero because the
// backend centers the data first.
struct PldaModel {
  Matrix f;           // speaker loading, d x d_s
  Matrix within_cov;  // W, d x d, positive definite
  std::vector<double> loglik_trace;

  int Dim() const { return static_cast<int>(f.rows()); }
  int SpeakerDim() const { return static_cast<int>(f.cols()); }
  Matrix BetweenCov() const { return f * f.transpose(); }
};

struct BackendModel {
  Vector center;
  Matrix whitener;  // m x m, symmetric inverse square root of dev covariance
  Matrix lda;       // m x d projection; empty means no projection
  PldaModel plda;
  double eigenvalue_floor = 0.0;
  int em_iterations = 0;
  std::vector<std::string> excluded_speakers;

  int InputDim() const { return static_cast<int>(center.size()); }
  int ProjectedDim() const {
    return lda.size() ? static_cast<int>(lda.cols()) : InputDim();
  }
};

struct ScoreSet {
  std::vector<double> genuine;
  std::vector<double> impostor;
};

// ---------------------------------------------------------------------------
// Preprocessing

struct PreprocessTransform {
  Vector center;
  Matrix whitener;
  double eigenvalue_floor = 0.0;
};

// Global mean plus the symmetric inverse square root of the sample
// covariance, with a relative eigenvalue floor against rank deficiency.
inline PreprocessTransform FitPreprocess(const SpeakerDataset &dev) {
  std::vector<const Vector *> all;
  all.reserve(dev.NumVectors());
  for (const auto &[id, vecs] : dev.Speakers())
    for (const auto &v : vecs) all.push_back(&v);
  GaussianModel g = FitGaussian(all);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.covariance);
  if (es.info() != Eigen::Success)
    throw NumericalError("FitPreprocess: eigendecomposition failed");
  const double max_eig = es.eigenvalues().maxCoeff();
  if (!(max_eig > 0.0))
    throw NumericalError("FitPreprocess: covariance has no positive eigenvalue");
  const double floor = 1e-8 * max_eig;
  Vector inv_sqrt = es.eigenvalues().cwiseMax(floor).cwiseSqrt().cwiseInverse();
  PreprocessTransform t;
  t.center = std::move(g.mean);
  t.whitener = es.eigenvectors() * inv_sqrt.asDiagonal() *
               es.eigenvectors().transpose();
  t.eigenvalue_floor = floor;
  return t;
}

// center -> whiten -> length-normalize, the fixed order of the pipeline.
inline Vector CenterWhitenNormalize(const PreprocessTransform &t,
                                    const Vector &v) {
  if (v.size() != t.center.size())
    throw DimensionMismatchError(
        Strf("preprocess: vector dimension %d, model has %d",
             static_cast<int>(v.size()), static_cast<int>(t.center.size())));
  Vector w = t.whitener * (v - t.center);
  const double norm = w.norm();
  if (!(norm > 0.0))
    throw ValidationError("preprocess: zero vector before length normalization");
  return w / norm;
}

// Full chain; applies the LDA projection when the model carries one.
inline Vector Preprocess(const BackendModel &model, const Vector &v) {
  PreprocessTransform t{model.center, model.whitener, model.eigenvalue_floor};
  Vector w = CenterWhitenNormalize(t, v);
  if (model.lda.size()) return model.lda.transpose() * w;
  return w;
}

// ---------------------------------------------------------------------------
// LDA

// Top-d generalized eigenvectors of (between-class scatter, within-class
// scatter + floor), columns ordered by decreasing eigenvalue, each signed so
// its largest-magnitude entry is positive.
inline Matrix FitLda(const SpeakerDataset &dev_preprocessed, int d) {
  const int m = dev_preprocessed.Dim();
  const auto n_speakers =
      static_cast<long long>(dev_preprocessed.NumSpeakers());
  if (d < 1 || d > m || d > n_speakers - 1)
    throw ValidationError(
        Strf("FitLda: d=%d must satisfy 1 <= d <= min(dim=%d, speakers-1=%lld)",
             d, m, n_speakers - 1));

  Vector global_mean = Vector::Zero(m);
  std::size_t total = 0;
  for (const auto &[id, vecs] : dev_preprocessed.Speakers())
    for (const auto &v : vecs) { global_mean += v; ++total; }
  global_mean /= static_cast<double>(total);

  Matrix between = Matrix::Zero(m, m);
  Matrix within = Matrix::Zero(m, m);
  for (const auto &[id, vecs] : dev_preprocessed.Speakers()) {
    Vector mean = Vector::Zero(m);
    for (const auto &v : vecs) mean += v;
    mean /= static_cast<double>(vecs.size());
    Vector centered = mean - global_mean;
    between.noalias() +=
        static_cast<double>(vecs.size()) * centered * centered.transpose();
    for (const auto &v : vecs) {
      Vector dd = v - mean;
      within.noalias() += dd * dd.transpose();
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> wes(within, Eigen::EigenvaluesOnly);
  const double floor = 1e-8 * std::max(wes.eigenvalues().maxCoeff(), 1e-300);
  within += floor * Matrix::Identity(m, m);

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(between, within);
  if (ges.info() != Eigen::Success)
    throw NumericalError("FitLda: generalized eigensolver failed");
  Matrix lda(m, d);
  for (int c = 0; c < d; ++c) {
    Vector col = ges.eigenvectors().col(m - 1 - c);  // decreasing eigenvalue
    int arg_max = 0;
    for (int r = 1; r < m; ++r)
      if (std::fabs(col[r]) > std::fabs(col[arg_max])) arg_max = r;
    if (col[arg_max] < 0.0) col = -col;
    lda.col(c) = col;
  }
  return lda;
}

// ---------------------------------------------------------------------------
// GPLDA by EM

namespace detail {

struct SpeakerStats {
  std::string id;
  double count = 0.0;
  Vector sum;
};

}  // namespace detail

// EM for x = F h + eps on speaker-grouped vectors (already preprocessed and
// projected).  Speakers with fewer than 2 samples are excluded with a
// warning.  The log-likelihood is recorded at initialization and after every
// iteration; EM guarantees the trace is non-decreasing.
//
// Per speaker the E-step needs only (k_i, sum_i): with T = F' W^-1 and
// Lambda_i = I + k_i T F, the posterior is h_i ~ N(Lambda_i^-1 T sum_i,
// Lambda_i^-1), and the data log-likelihood is
//   -(N d/2) log 2pi - (N/2) log|W| - tr(W^-1 XX)/2
//   + sum_i [ -log|Lambda_i|/2 + b_i' Lambda_i^-1 b_i / 2 ],  b_i = T sum_i.
inline PldaModel FitGplda(const SpeakerDataset &dev_projected, int d_s,
                          int iters,
                          std::vector<std::string> *excluded = nullptr) {
  const int d = dev_projected.Dim();
  if (d_s < 1 || d_s > d)
    throw ValidationError(
        Strf("FitGplda: d_s=%d must satisfy 1 <= d_s <= d=%d", d_s, d));
  if (iters < 1) throw ValidationError("FitGplda: iters must be >= 1");

  std::vector<detail::SpeakerStats> stats;
  Matrix xx = Matrix::Zero(d, d);
  double n_total = 0.0;
  for (const auto &[id, vecs] : dev_projected.Speakers()) {
    if (vecs.size() < 2) {
      Warn(Strf("FitGplda: excluding speaker '%s' with %zu sample(s)",
                id.c_str(), vecs.size()));
      if (excluded) excluded->push_back(id);
      continue;
    }
    detail::SpeakerStats s;
    s.id = id;
    s.count = static_cast<double>(vecs.size());
    s.sum = Vector::Zero(d);
    for (const auto &v : vecs) {
      s.sum += v;
      xx.noalias() += v * v.transpose();
      n_total += 1.0;
    }
    stats.push_back(std::move(s));
  }
  if (stats.empty())
    throw InsufficientDataError(
        "FitGplda: every speaker has fewer than 2 samples");

  const auto n_speakers = static_cast<double>(stats.size());

  // Moment-based init: speaker loading from the spectrum of the speaker-mean
  // second moment, within covariance from the pooled residuals.
  Matrix mean_moment = Matrix::Zero(d, d);
  for (const auto &s : stats) {
    Vector mu = s.sum / s.count;
    mean_moment.noalias() += mu * mu.transpose();
  }
  mean_moment /= n_speakers;
  Eigen::SelfAdjointEigenSolver<Matrix> mes(mean_moment);
  PldaModel model;
  model.f.resize(d, d_s);
  for (int c = 0; c < d_s; ++c) {
    const double eig = std::max(mes.eigenvalues()(d - 1 - c), 1e-12);
    model.f.col(c) = mes.eigenvectors().col(d - 1 - c) * std::sqrt(eig);
  }
  Matrix within = Matrix::Zero(d, d);
  for (const auto &[id, vecs] : dev_projected.Speakers()) {
    if (vecs.size() < 2) continue;
    Vector mu = Vector::Zero(d);
    for (const auto &v : vecs) mu += v;
    mu /= static_cast<double>(vecs.size());
    for (const auto &v : vecs) {
      Vector dd = v - mu;
      within.noalias() += dd * dd.transpose();
    }
  }
  model.within_cov = within / n_total;
  model.within_cov += 1e-10 * model.within_cov.trace() / d * Matrix::Identity(d, d);

  auto loglik = [&]() {
    Eigen::LLT<Matrix> llt(model.within_cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("FitGplda: within covariance lost positive definiteness");
    const Matrix w_inv = llt.solve(Matrix::Identity(d, d));
    const Matrix t = model.f.transpose() * w_inv;
    const double log_det_w = detail::LogDetFromLlt(llt);
    double ll = -0.5 * n_total * d * std::log(2.0 * M_PI) -
                0.5 * n_total * log_det_w - 0.5 * (w_inv * xx).trace();
    std::map<double, std::pair<Matrix, double>> cache;  // k -> (Lambda^-1, log|Lambda|)
    for (const auto &s : stats) {
      auto it = cache.find(s.count);
      if (it == cache.end()) {
        Matrix lambda =
            Matrix::Identity(d_s, d_s) + s.count * t * model.f;
        Eigen::LLT<Matrix> lam_llt(lambda);
        it = cache.emplace(s.count,
                           std::make_pair(
                               lam_llt.solve(Matrix::Identity(d_s, d_s)),
                               detail::LogDetFromLlt(lam_llt))).first;
      }
      const Vector b = t * s.sum;
      ll += -0.5 * it->second.second + 0.5 * b.dot(it->second.first * b);
    }
    return ll;
  };

  model.loglik_trace.push_back(loglik());

  for (int iter = 0; iter < iters; ++iter) {
    Eigen::LLT<Matrix> llt(model.within_cov);
    if (llt.info() != Eigen::Success)
      throw NumericalError("FitGplda: within covariance lost positive definiteness");
    const Matrix w_inv = llt.solve(Matrix::Identity(d, d));
    const Matrix t = model.f.transpose() * w_inv;
    std::map<double, Matrix> lambda_inv;
    for (const auto &s : stats)
      if (!lambda_inv.count(s.count)) {
        Matrix lambda = Matrix::Identity(d_s, d_s) + s.count * t * model.f;
        lambda_inv[s.count] =
            Eigen::LLT<Matrix>(lambda).solve(Matrix::Identity(d_s, d_s));
      }
    Matrix r = Matrix::Zero(d_s, d_s);   // sum_i k_i E[h h']
    Matrix c = Matrix::Zero(d, d_s);     // sum_i sum_i_x E[h]'
    for (const auto &s : stats) {
      const Matrix &li = lambda_inv[s.count];
      const Vector e_h = li * (t * s.sum);
      r.noalias() += s.count * (li + e_h * e_h.transpose());
      c.noalias() += s.sum * e_h.transpose();
    }
    model.f = r.transpose().ldlt().solve(c.transpose()).transpose();
    Matrix w_new = (xx - model.f * c.transpose() - c * model.f.transpose() +
                    model.f * r * model.f.transpose()) /
                   n_total;
    model.within_cov = 0.5 * (w_new + w_new.transpose());
    model.loglik_trace.push_back(loglik());
  }
  return model;
}

// ---------------------------------------------------------------------------
// Scoring

// Log-likelihood ratio of same-speaker vs different-speaker hypotheses for a
// vector pair.  With B = FF' and S = B + W, the stacked covariances are
//   same:      [[S, B], [B, S]]     different: [[S, 0], [0, S]]
// Rotating to u = (x1+x2)/sqrt(2), v = (x1-x2)/sqrt(2) block-diagonalizes the
// same-speaker matrix into (S+B, S-B) = (W+2B, W), so
//   score = ( u' (S^-1 - (W+2B)^-1) u + v' (S^-1 - W^-1) v
//             + 2 log|S| - log|W+2B| - log|W| ) / 2.
// Swapping x1 and x2 only negates v, so the score is exactly symmetric.
class PldaScorer {
 public:
  explicit PldaScorer(const PldaModel &model) {
    const int d = model.Dim();
    const Matrix b = model.BetweenCov();
    const Matrix total = b + model.within_cov;
    auto llt_total = detail::CholeskyOrThrow(total, "PldaScorer(B+W)");
    auto llt_wide = detail::CholeskyOrThrow(
        Matrix(model.within_cov + 2.0 * b), "PldaScorer(W+2B)");
    auto llt_w = detail::CholeskyOrThrow(model.within_cov, "PldaScorer(W)");
    const Matrix eye = Matrix::Identity(d, d);
    m_u_ = llt_total.solve(eye) - llt_wide.solve(eye);
    m_v_ = llt_total.solve(eye) - llt_w.solve(eye);
    log_det_term_ = 2.0 * detail::LogDetFromLlt(llt_total) -
                    detail::LogDetFromLlt(llt_wide) -
                    detail::LogDetFromLlt(llt_w);
    dim_ = d;
  }

  double Score(const Vector &x1, const Vector &x2) const {
    if (x1.size() != dim_ || x2.size() != dim_)
      throw DimensionMismatchError(
          Strf("PldaScorer: expected dimension %d vectors", dim_));
    const Vector u = (x1 + x2) * M_SQRT1_2;
    const Vector v = (x1 - x2) * M_SQRT1_2;
    return 0.5 * (u.dot(m_u_ * u) + v.dot(m_v_ * v) + log_det_term_);
  }

 private:
  Matrix m_u_, m_v_;
  double log_det_term_ = 0.0;
  int dim_ = 0;
};

inline double ScoreLlr(const PldaModel &model, const Vector &x1,
                       const Vector &x2) {
  return PldaScorer(model).Score(x1, x2);
}

// ---------------------------------------------------------------------------
// Trials and EER

// Per speaker, holds out one sample (the last after a seeded shuffle) as the
// test vector and enrolls the mean of the remaining preprocessed vectors.
// Every test is scored against every enrollment; the diagonal gives genuine
// scores.  When a quantizer bank is supplied, raw vectors are discretized
// before preprocessing.
inline ScoreSet BuildTrials(const SpeakerDataset &measure,
                            const BackendModel &model,
                            const QuantizerBank *bank = nullptr,
                            uint64_t seed = 0) {
  std::vector<Vector> tests, enrollments;
  for (const auto &[id, vecs] : measure.Speakers()) {
    if (vecs.size() < 2) {
      Warn(Strf("BuildTrials: excluding speaker '%s' with %zu sample(s)",
                id.c_str(), vecs.size()));
      continue;
    }
    std::vector<std::size_t> order(vecs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 rng(MixSeed(seed, Fnv1a64(id)));
    SeededShuffle(order, rng);

    auto prepared = [&](const Vector &raw) {
      if (bank) return Preprocess(model, Dequantize(*bank, Quantize(*bank, raw)));
      return Preprocess(model, raw);
    };
    Vector enroll = Vector::Zero(model.ProjectedDim());
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
      enroll += prepared(vecs[order[i]]);
    enroll /= static_cast<double>(order.size() - 1);
    enrollments.push_back(std::move(enroll));
    tests.push_back(prepared(vecs[order.back()]));
  }
  const std::size_t n = tests.size();
  if (n < 2)
    throw InsufficientDataError(
        "BuildTrials: need at least 2 speakers with 2+ samples");

  PldaScorer scorer(model.plda);
  std::vector<std::vector<double>> rows(n);
  ParallelFor(n, [&](std::size_t i) {
    rows[i].resize(n);
    for (std::size_t j = 0; j < n; ++j)
      rows[i][j] = scorer.Score(tests[i], enrollments[j]);
  });
  ScoreSet scores;
  scores.genuine.reserve(n);
  scores.impostor.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      (i == j ? scores.genuine : scores.impostor).push_back(rows[i][j]);
  return scores;
}

// Equal error rate: sweep thresholds over the union of scores with
// FAR(t) = fraction of impostor scores >= t and FRR(t) = fraction of genuine
// scores < t, and return (FAR+FRR)/2 where they meet, interpolating linearly
// between adjacent thresholds when the curves cross between them.
inline double ComputeEer(const ScoreSet &scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw EmptyInputError("ComputeEer: both score lists must be non-empty");
  std::vector<double> gen = scores.genuine, imp = scores.impostor;
  std::sort(gen.begin(), gen.end());
  std::sort(imp.begin(), imp.end());
  std::vector<double> candidates;
  candidates.reserve(gen.size() + imp.size() + 1);
  candidates.insert(candidates.end(), gen.begin(), gen.end());
  candidates.insert(candidates.end(), imp.begin(), imp.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  candidates.push_back(candidates.back() + 1.0);  // FAR = 0 sentinel

  const double ng = static_cast<double>(gen.size());
  const double ni = static_cast<double>(imp.size());
  auto far_at = [&](double t) {
    auto it = std::lower_bound(imp.begin(), imp.end(), t);
    return static_cast<double>(imp.end() - it) / ni;
  };
  auto frr_at = [&](double t) {
    auto it = std::lower_bound(gen.begin(), gen.end(), t);
    return static_cast<double>(it - gen.begin()) / ng;
  };

  double prev_far = far_at(candidates.front());
  double prev_frr = frr_at(candidates.front());
  if (prev_far - prev_frr <= 0.0) return 0.5 * (prev_far + prev_frr);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const double far = far_at(candidates[i]);
    const double frr = frr_at(candidates[i]);
    const double diff = far - frr;
    if (diff <= 0.0) {
      if (diff == 0.0) return 0.5 * (far + frr);
      const double prev_diff = prev_far - prev_frr;
      const double alpha = prev_diff / (prev_diff - diff);
      const double far_x = prev_far + alpha * (far - prev_far);
      const double frr_x = prev_frr + alpha * (frr - prev_frr);
      return 0.5 * (far_x + frr_x);
    }
    prev_far = far;
    prev_frr = frr;
  }
  return 0.5 * (prev_far + prev_frr);  // unreachable: sentinel has diff <= 0
}

// ---------------------------------------------------------------------------
// Whole-backend training and serialization

struct BackendConfig {
  int lda_dim = 0;    // 0: no LDA projection
  int plda_dim = -1;  // -1: half the projected dimension
  int em_iters = 10;
};

inline BackendModel TrainBackend(const SpeakerDataset &dev,
                                 const BackendConfig &cfg) {
  BackendModel model;
  PreprocessTransform t = FitPreprocess(dev);
  model.center = t.center;
  model.whitener = t.whitener;
  model.eigenvalue_floor = t.eigenvalue_floor;

  SpeakerDataset transformed(dev.Dim());
  for (const auto &[id, vecs] : dev.Speakers())
    for (const auto &v : vecs) transformed.Add(id, CenterWhitenNormalize(t, v));

  SpeakerDataset projected(cfg.lda_dim > 0 ? cfg.lda_dim : dev.Dim());
  if (cfg.lda_dim > 0) {
    model.lda = FitLda(transformed, cfg.lda_dim);
    for (const auto &[id, vecs] : transformed.Speakers())
      for (const auto &v : vecs) projected.Add(id, model.lda.transpose() * v);
  } else {
    projected = std::move(transformed);
  }

  const int d = projected.Dim();
  const int d_s = cfg.plda_dim > 0 ? cfg.plda_dim : std::max(1, d / 2);
  model.plda = FitGplda(projected, d_s, cfg.em_iters, &model.excluded_speakers);
  model.em_iterations = cfg.em_iters;
  return model;
}

constexpr char kModelMagic[4] = {'B', 'I', 'O', 'M'};

inline void SaveBackend(const BackendModel &model, const std::string &path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(Strf("cannot write %s", path.c_str()));
  os.write(kModelMagic, 4);
  detail::WriteU32(os, 1);
  const auto m = static_cast<uint32_t>(model.center.size());
  const auto d = static_cast<uint32_t>(model.lda.size() ? model.lda.cols() : 0);
  const auto pd = static_cast<uint32_t>(model.plda.Dim());
  const auto ds = static_cast<uint32_t>(model.plda.SpeakerDim());
  detail::WriteU32(os, m);
  detail::WriteU32(os, d);
  detail::WriteU32(os, pd);
  detail::WriteU32(os, ds);
  auto write_matrix = [&](const Matrix &a) {
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      for (Eigen::Index c = 0; c < a.cols(); ++c) detail::WriteF64(os, a(r, c));
  };
  for (Eigen::Index j = 0; j < model.center.size(); ++j)
    detail::WriteF64(os, model.center[j]);
  write_matrix(model.whitener);
  if (d > 0) write_matrix(model.lda);
  write_matrix(model.plda.f);
  write_matrix(model.plda.within_cov);

  nlohmann::json meta;
  meta["eigenvalue_floor"] = model.eigenvalue_floor;
  meta["em_iterations"] = model.em_iterations;
  meta["loglik_trace"] = model.plda.loglik_trace;
  meta["final_loglik"] = model.plda.loglik_trace.empty()
                             ? 0.0
                             : model.plda.loglik_trace.back();
  meta["excluded_speakers"] = model.excluded_speakers;
  std::ofstream ms(path + ".json");
  if (!ms) throw IoError(Strf("cannot write %s.json", path.c_str()));
  ms << meta.dump(2) << "\n";
}

inline BackendModel LoadBackend(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(Strf("cannot open %s", path.c_str()));
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kModelMagic, 4) != 0)
    throw ParseError("not a BIOM backend model file");
  if (detail::ReadPod<uint32_t>(is, "version") != 1)
    throw ParseError("unsupported backend model version");
  const auto m = detail::ReadPod<uint32_t>(is, "input dim");
  const auto d = detail::ReadPod<uint32_t>(is, "lda dim");
  const auto pd = detail::ReadPod<uint32_t>(is, "plda dim");
  const auto ds = detail::ReadPod<uint32_t>(is, "plda speaker dim");
  BackendModel model;
  auto read_matrix = [&](uint32_t rows, uint32_t cols) {
    Matrix a(rows, cols);
    for (uint32_t r = 0; r < rows; ++r)
      for (uint32_t c = 0; c < cols; ++c)
        a(r, c) = detail::ReadPod<double>(is, "model value");
    return a;
  };
  model.center.resize(m);
  for (uint32_t j = 0; j < m; ++j)
    model.center[j] = detail::ReadPod<double>(is, "center value");
  model.whitener = read_matrix(m, m);
  if (d > 0) model.lda = read_matrix(m, d);
  model.plda.f = read_matrix(pd, ds);
  model.plda.within_cov = read_matrix(pd, pd);

  std::ifstream ms(path + ".json");
  if (ms) {
    nlohmann::json meta;
    try {
      ms >> meta;
      model.eigenvalue_floor = meta.value("eigenvalue_floor", 0.0);
      model.em_iterations = meta.value("em_iterations", 0);
      if (meta.contains("loglik_trace"))
        model.plda.loglik_trace =
            meta["loglik_trace"].get<std::vector<double>>();
      if (meta.contains("excluded_speakers"))
        model.excluded_speakers =
            meta["excluded_speakers"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(Strf("bad model metadata %s.json: %s", path.c_str(),
                            e.what()));
    }
  }
  return model;
}

inline void SaveScoreSetCsv(const ScoreSet &scores, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError(Strf("cannot write %s", path.c_str()));
  os << "label,score\n";
  char buf[40];
  for (double s : scores.genuine) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    os << "genuine," << buf << "\n";
  }
  for (double s : scores.impostor) {
    std::snprintf(buf, sizeof(buf), "%.17g", s);
    os << "impostor," << buf << "\n";
  }
}

inline ScoreSet LoadScoreSetCsv(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError(Strf("cannot open %s", path.c_str()));
  std::string line;
  if (!std::getline(is, line) ||
      (line != "label,score" && line != "label,score\r"))
    throw ParseError(Strf("%s: expected header 'label,score'", path.c_str()));
  ScoreSet scores;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError(Strf("%s line %zu: missing comma", path.c_str(), line_no));
    const std::string label = line.substr(0, comma);
    const double value =
        detail::ParseDouble(std::string_view(line).substr(comma + 1), line_no, 2);
    if (label == "genuine")
      scores.genuine.push_back(value);
    else if (label == "impostor")
      scores.impostor.push_back(value);
    else
      throw ParseError(Strf("%s line %zu: unknown label '%s'", path.c_str(),
                            line_no, label.c_str()));
  }
  return scores;
}

}  // namespace vuniq

#endif  // VUNIQ_BACKEND_HPP_
