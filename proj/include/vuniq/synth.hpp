// vuniq/synth.hpp

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

#ifndef VUNIQ_SYNTH_HPP_
#define VUNIQ_SYNTH_HPP_

#include <cmath>
#include <cstdint>
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

// Gaussian speaker population: speaker means are drawn per dimension from
// N(0, between_std^2) and samples from N(mean, within_std^2).
struct PopulationSpec {
  int dim = 0;
  std::vector<double> between_std;  // per dimension
  std::vector<double> within_std;   // per dimension
  long long n_speakers = 0;
  long long k_samples = 0;
  uint64_t seed = 0;

  PopulationSpec() = default;
  PopulationSpec(int dim_in, double between, double within,
                 long long n_speakers_in, long long k_samples_in,
                 uint64_t seed_in)
      : dim(dim_in),
        between_std(dim_in, between),
        within_std(dim_in, within),
        n_speakers(n_speakers_in),
        k_samples(k_samples_in),
        seed(seed_in) {}

  void Validate() const {
    if (dim < 1) throw ValidationError("population: dim must be >= 1");
    if (n_speakers < 1 || k_samples < 1)
      throw ValidationError("population: counts must be >= 1");
    if (static_cast<int>(between_std.size()) != dim ||
        static_cast<int>(within_std.size()) != dim)
      throw ValidationError("population: std vectors must have length dim");
    for (double s : between_std)
      if (!(s > 0.0) || !std::isfinite(s))
        throw ValidationError("population: between_std must be finite and > 0");
    for (double s : within_std)
      if (!(s > 0.0) || !std::isfinite(s))
        throw ValidationError("population: within_std must be finite and > 0");
  }
};

inline nlohmann::json PopulationSpecToJson(const PopulationSpec &spec) {
  return nlohmann::json{{"dim", spec.dim},
                        {"between_std", spec.between_std},
                        {"within_std", spec.within_std},
                        {"n_speakers", spec.n_speakers},
                        {"k_samples", spec.k_samples},
                        {"seed", spec.seed}};
}

inline PopulationSpec PopulationSpecFromJson(const nlohmann::json &j) {
  PopulationSpec spec;
  try {
    spec.dim = j.at("dim").get<int>();
    auto read_std = [&](const char *key) {
      std::vector<double> out;
      const auto &v = j.at(key);
      if (v.is_number())
        out.assign(static_cast<std::size_t>(std::max(spec.dim, 0)),
                   v.get<double>());
      else
        out = v.get<std::vector<double>>();
      return out;
    };
    spec.between_std = read_std("between_std");
    spec.within_std = read_std("within_std");
    spec.n_speakers = j.at("n_speakers").get<long long>();
    spec.k_samples = j.at("k_samples").get<long long>();
    spec.seed = j.at("seed").get<uint64_t>();
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(Strf("bad population spec: %s", e.what()));
  }
  spec.Validate();
  return spec;
}

namespace detail {

inline std::string SyntheticSpeakerId(const char *prefix, long long index) {
  return Strf("%s%06lld", prefix, index);
}

}  // namespace detail

// Each speaker derives its own stream from (seed, speaker index), so
// generation order (and any parallel schedule) cannot change the output.
inline SpeakerDataset GeneratePopulation(const PopulationSpec &spec) {
  spec.Validate();
  SpeakerDataset ds(spec.dim);
  ds.ManifestInfo().source = "synthetic";
  std::vector<std::vector<Vector>> per_speaker(spec.n_speakers);
  ParallelFor(static_cast<std::size_t>(spec.n_speakers), [&](std::size_t i) {
    SplitMix64 rng(MixSeed(spec.seed, static_cast<uint64_t>(i)));
    Vector mean(spec.dim);
    for (int j = 0; j < spec.dim; ++j)
      mean[j] = spec.between_std[j] * rng.NextNormal();
    auto &vecs = per_speaker[i];
    vecs.reserve(spec.k_samples);
    for (long long t = 0; t < spec.k_samples; ++t) {
      Vector v(spec.dim);
      for (int j = 0; j < spec.dim; ++j)
        v[j] = mean[j] + spec.within_std[j] * rng.NextNormal();
      vecs.push_back(std::move(v));
    }
  });
  for (long long i = 0; i < spec.n_speakers; ++i)
    for (auto &v : per_speaker[i])
      ds.Add(detail::SyntheticSpeakerId("s", i), std::move(v));
  return ds;
}

// x = F h + eps with h per speaker ~ N(0, I) and eps per sample ~ N(0, W).
inline SpeakerDataset GeneratePldaPopulation(const Matrix &f, const Matrix &w,
                                             long long n_speakers,
                                             long long k_samples,
                                             uint64_t seed) {
  if (n_speakers < 1 || k_samples < 1)
    throw ValidationError("GeneratePldaPopulation: counts must be >= 1");
  if (w.rows() != w.cols() || w.rows() != f.rows())
    throw DimensionMismatchError("GeneratePldaPopulation: shape mismatch");
  Eigen::LLT<Matrix> llt(w);
  if (llt.info() != Eigen::Success)
    throw NumericalError("GeneratePldaPopulation: W not positive definite");
  const Matrix chol = llt.matrixL();
  const int d = static_cast<int>(f.rows());
  const int d_s = static_cast<int>(f.cols());

  SpeakerDataset ds(d);
  ds.ManifestInfo().source = "synthetic-plda";
  std::vector<std::vector<Vector>> per_speaker(n_speakers);
  ParallelFor(static_cast<std::size_t>(n_speakers), [&](std::size_t i) {
    SplitMix64 rng(MixSeed(seed, static_cast<uint64_t>(i)));
    Vector h(d_s);
    for (int j = 0; j < d_s; ++j) h[j] = rng.NextNormal();
    const Vector speaker_mean = f * h;
    auto &vecs = per_speaker[i];
    vecs.reserve(k_samples);
    for (long long t = 0; t < k_samples; ++t) {
      Vector z(d);
      for (int j = 0; j < d; ++j) z[j] = rng.NextNormal();
      vecs.push_back(speaker_mean + chol * z);
    }
  });
  for (long long i = 0; i < n_speakers; ++i)
    for (auto &v : per_speaker[i])
      ds.Add(detail::SyntheticSpeakerId("p", i), std::move(v));
  return ds;
}

// iid Bernoulli(p) binary vectors, one synthetic speaker per vector.
inline QuantizedDataset GenerateIidBinary(long long n_vectors, int length,
                                          double p, uint64_t seed) {
  if (n_vectors < 1 || length < 1)
    throw ValidationError("GenerateIidBinary: counts must be >= 1");
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError(Strf("GenerateIidBinary: p=%g outside (0,1)", p));
  QuantizedDataset ds(length, 1);
  std::vector<std::vector<uint8_t>> rows(n_vectors);
  ParallelFor(static_cast<std::size_t>(n_vectors), [&](std::size_t i) {
    SplitMix64 rng(MixSeed(seed, static_cast<uint64_t>(i)));
    auto &codes = rows[i];
    codes.resize(length);
    for (int j = 0; j < length; ++j)
      codes[j] = rng.NextDouble() < p ? 1 : 0;
  });
  for (long long i = 0; i < n_vectors; ++i)
    ds.Add(detail::SyntheticSpeakerId("v", i), std::move(rows[i]));
  return ds;
}

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature (physicists' convention):
//   integral exp(-t^2) f(t) dt  ~=  sum_k w_k f(t_k).

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix with
// off-diagonals sqrt(k/2); weights come from the first eigenvector entries.
inline GaussHermiteRule MakeGaussHermiteRule(int order) {
  if (order < 1) throw ValidationError("Gauss-Hermite order must be >= 1");
  Matrix jacobi = Matrix::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    const double beta = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = beta;
    jacobi(k - 1, k) = beta;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
  if (es.info() != Eigen::Success)
    throw NumericalError("Gauss-Hermite eigensolve failed");
  GaussHermiteRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double sqrt_pi = std::sqrt(M_PI);
  for (int k = 0; k < order; ++k) {
    rule.nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    rule.weights[k] = sqrt_pi * v0 * v0;
  }
  return rule;
}

// ---------------------------------------------------------------------------
// Independent oracles

struct MiOracleResult {
  double h_population = 0.0;
  double h_within = 0.0;
  double i_bits = 0.0;
  double achieved_tol = 0.0;
  int order = 0;
};

namespace detail {

inline double CellEntropyBits(const std::vector<double> &boundaries,
                              double mean, double std_dev) {
  double h = 0.0;
  double prev_cdf = 0.0;
  for (std::size_t c = 0; c <= boundaries.size(); ++c) {
    const double cdf = c < boundaries.size()
                           ? NormalCdf((boundaries[c] - mean) / std_dev)
                           : 1.0;
    const double p = cdf - prev_cdf;
    prev_cdf = cdf;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

inline double MiOracleAtOrder(const PopulationSpec &spec,
                              const QuantizerBank &bank, int order,
                              double *h_population, double *h_within) {
  const GaussHermiteRule rule = MakeGaussHermiteRule(order);
  double hp_total = 0.0, hw_total = 0.0;
  for (int j = 0; j < spec.dim; ++j) {
    const auto &boundaries = bank.per_dim[j].boundaries;
    const double tau = spec.between_std[j];
    const double sigma = spec.within_std[j];
    const double marginal_std = std::sqrt(tau * tau + sigma * sigma);
    hp_total += CellEntropyBits(boundaries, 0.0, marginal_std);
    // E_mu[H(V_j | mu)] with mu ~ N(0, tau^2): substitute mu = sqrt(2) tau t.
    double hw = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double mu = M_SQRT2 * tau * rule.nodes[k];
      hw += rule.weights[k] * CellEntropyBits(boundaries, mu, sigma);
    }
    hw_total += hw / std::sqrt(M_PI);
  }
  if (h_population) *h_population = hp_total;
  if (h_within) *h_within = hw_total;
  return hp_total - hw_total;
}

}  // namespace detail

// Exact mutual information of the quantized Gaussian population, by cell
// probabilities of the marginal for H(V) and Gauss-Hermite integration over
// the speaker mean for H(V|S).  Convergence is checked by comparing two
// quadrature orders.
inline MiOracleResult NumericMiOracle(const PopulationSpec &spec,
                                      const QuantizerBank &bank,
                                      int order = 64, double tol = 1e-6) {
  spec.Validate();
  if (bank.Dim() != spec.dim)
    throw DimensionMismatchError(
        Strf("NumericMiOracle: bank dim %d, spec dim %d", bank.Dim(), spec.dim));
  MiOracleResult result;
  result.order = order;
  const double coarse =
      detail::MiOracleAtOrder(spec, bank, order, nullptr, nullptr);
  result.i_bits = detail::MiOracleAtOrder(spec, bank, order + 16,
                                          &result.h_population,
                                          &result.h_within);
  result.achieved_tol = std::fabs(result.i_bits - coarse);
  if (result.achieved_tol > tol)
    throw NumericalError(
        Strf("NumericMiOracle: integration not converged (achieved %g, "
             "requested %g)", result.achieved_tol, tol));
  return result;
}

// Brute-force recomputation of (H(V), H(V|S)) by direct per-symbol counting.
// Deliberately shares no accumulation logic with the entropy module; guarded
// to desk scale.
inline std::pair<double, double> BruteForceEntropyOracle(
    const QuantizedDataset &qds) {
  if (qds.Dim() > 6 || qds.Bits() > 3 || qds.NumVectors() > 10000)
    throw ValidationError(
        "BruteForceEntropyOracle: size guard exceeded (dim <= 6, bits <= 3, "
        "vectors <= 10000)");
  if (qds.NumVectors() == 0)
    throw EmptyInputError("BruteForceEntropyOracle: empty dataset");
  const int alphabet = qds.AlphabetSize();

  auto entropy_of_column =
      [&](const std::vector<const std::vector<uint8_t> *> &rows, int j) {
        double h = 0.0;
        for (int symbol = 0; symbol < alphabet; ++symbol) {
          std::size_t count = 0;
          for (const auto *codes : rows)
            if ((*codes)[j] == symbol) ++count;
          if (count == 0) continue;
          const double p =
              static_cast<double>(count) / static_cast<double>(rows.size());
          h += p * std::log2(1.0 / p);
        }
        return h;
      };

  std::vector<const std::vector<uint8_t> *> pooled;
  pooled.reserve(qds.NumVectors());
  for (const auto &[id, vecs] : qds.Speakers())
    for (const auto &codes : vecs) pooled.push_back(&codes);

  double h_population = 0.0;
  for (int j = 0; j < qds.Dim(); ++j)
    h_population += entropy_of_column(pooled, j);

  double h_within = 0.0;
  for (const auto &[id, vecs] : qds.Speakers()) {
    std::vector<const std::vector<uint8_t> *> rows;
    rows.reserve(vecs.size());
    for (const auto &codes : vecs) rows.push_back(&codes);
    for (int j = 0; j < qds.Dim(); ++j) h_within += entropy_of_column(rows, j);
  }
  h_within /= static_cast<double>(qds.NumSpeakers());
  return {h_population, h_within};
}

}  // namespace vuniq

#endif  // VUNIQ_SYNTH_HPP_
