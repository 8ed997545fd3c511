// vuniq/baselines.hpp

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

#ifndef VUNIQ_BASELINES_HPP_
#define VUNIQ_BASELINES_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"
#include "vuniq/gaussian.hpp"

namespace vuniq {

// Equivalent number of independent Bernoulli trials implied by the mean and
// variance of normalized Hamming distances: N = p(1-p) / sigma^2.
struct DofEstimate {
  double p_hat = 0.0;
  double sigma2_hat = 0.0;
  double dof = 0.0;
};

inline DofEstimate DofFromStats(double p_hat, double sigma2_hat) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0))
    throw ValidationError(Strf("DofFromStats: p_hat=%g outside [0,1]", p_hat));
  if (!(sigma2_hat > 0.0))
    throw DegenerateInputError("DofFromStats: variance must be positive");
  return {p_hat, sigma2_hat, p_hat * (1.0 - p_hat) / sigma2_hat};
}

enum class Pairing { kBetweenSpeaker, kAllPairs };

inline std::string PairingName(Pairing p) {
  return p == Pairing::kBetweenSpeaker ? "between_speaker" : "all_pairs";
}

inline Pairing PairingFromName(const std::string &s) {
  if (s == "between_speaker") return Pairing::kBetweenSpeaker;
  if (s == "all_pairs") return Pairing::kAllPairs;
  throw ConfigError(Strf("unknown pairing '%s'", s.c_str()));
}

// Degrees-of-freedom estimate from pairwise normalized Hamming distances of a
// binary (1-bit) dataset.  between_speaker pairs vectors of distinct speakers
// only; all_pairs uses every unordered vector pair.
inline DofEstimate HammingDof(const QuantizedDataset &ds, Pairing pairing) {
  if (ds.Bits() != 1)
    throw ValidationError(
        Strf("HammingDof requires 1-bit codes, dataset has %d bits", ds.Bits()));
  if (ds.NumVectors() < 2)
    throw InsufficientDataError("HammingDof: need at least 2 vectors");
  if (pairing == Pairing::kBetweenSpeaker && ds.NumSpeakers() < 2)
    throw InsufficientDataError(
        "HammingDof: between_speaker pairing needs at least 2 speakers");

  const int dim = ds.Dim();
  const int words = (dim + 63) / 64;
  std::vector<uint64_t> packed;
  std::vector<uint32_t> owner;
  packed.reserve(ds.NumVectors() * static_cast<std::size_t>(words));
  owner.reserve(ds.NumVectors());
  uint32_t speaker_index = 0;
  for (const auto &[id, vecs] : ds.Speakers()) {
    for (const auto &codes : vecs) {
      for (int w = 0; w < words; ++w) {
        uint64_t word = 0;
        for (int b = 0; b < 64 && w * 64 + b < dim; ++b)
          word |= static_cast<uint64_t>(codes[w * 64 + b] & 1u) << b;
        packed.push_back(word);
      }
      owner.push_back(speaker_index);
    }
    ++speaker_index;
  }

  const std::size_t n = owner.size();
  std::size_t pairs = 0;
  double sum = 0.0, sum_sq = 0.0;
  const double inv_dim = 1.0 / static_cast<double>(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const uint64_t *a = packed.data() + i * words;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pairing == Pairing::kBetweenSpeaker && owner[i] == owner[j]) continue;
      const uint64_t *b = packed.data() + j * words;
      int hamming = 0;
      for (int w = 0; w < words; ++w) hamming += std::popcount(a[w] ^ b[w]);
      const double d = hamming * inv_dim;
      sum += d;
      sum_sq += d * d;
      ++pairs;
    }
  }
  if (pairs < 2)
    throw InsufficientDataError(
        Strf("HammingDof: only %zu pair(s), need at least 2", pairs));
  const double np = static_cast<double>(pairs);
  const double mean = sum / np;
  const double var = (sum_sq - np * mean * mean) / (np - 1.0);
  if (!(var > 0.0))
    throw DegenerateInputError(
        "HammingDof: all pairwise distances identical, variance is zero");
  return DofFromStats(mean, var);
}

enum class DependencyTransform { kDuplicateHalves, kXorAppend };

// Structured redundancy transforms used to probe how the DoF estimate reacts
// to dependent coordinates: duplication (length 2N) and appending the XOR of
// the two halves (length 3N/2).
inline std::vector<uint8_t> TransformBinaryVector(
    std::span<const uint8_t> bits, DependencyTransform kind) {
  if (bits.size() % 2 != 0)
    throw ValidationError("dependency transform requires even vector length");
  std::vector<uint8_t> out(bits.begin(), bits.end());
  if (kind == DependencyTransform::kDuplicateHalves) {
    out.insert(out.end(), bits.begin(), bits.end());
  } else {
    const std::size_t half = bits.size() / 2;
    for (std::size_t i = 0; i < half; ++i)
      out.push_back(static_cast<uint8_t>((bits[i] ^ bits[half + i]) & 1u));
  }
  return out;
}

inline QuantizedDataset TransformBinaryDataset(const QuantizedDataset &ds,
                                               DependencyTransform kind) {
  if (ds.Bits() != 1)
    throw ValidationError("dependency transforms require a 1-bit dataset");
  const int out_dim = kind == DependencyTransform::kDuplicateHalves
                          ? ds.Dim() * 2
                          : ds.Dim() + ds.Dim() / 2;
  if (ds.Dim() % 2 != 0)
    throw ValidationError("dependency transform requires even vector length");
  QuantizedDataset out(out_dim, 1);
  for (const auto &[id, vecs] : ds.Speakers())
    for (const auto &codes : vecs)
      out.Add(id, TransformBinaryVector(codes, kind));
  return out;
}

// Average per-speaker KL divergence to the population model, both Gaussian.
// Speaker covariances are shrunk toward the population covariance and
// ridge-stabilized: (1-lambda)*S_i + lambda*S_pop + ridge*I.
struct AdlerResult {
  double bits = 0.0;
  double lambda = 0.0;
  double ridge = 0.0;
  long long n_speakers = 0;
};

inline AdlerResult AdlerInformation(const SpeakerDataset &ds,
                                    double lambda = 0.5,
                                    double ridge = -1.0 /* auto */) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw ValidationError(Strf("AdlerInformation: lambda=%g outside [0,1]",
                               lambda));
  if (ds.NumSpeakers() < 2)
    throw InsufficientDataError("AdlerInformation: need at least 2 speakers");
  for (const auto &[id, vecs] : ds.Speakers())
    if (vecs.size() < 2)
      throw InsufficientDataError(
          Strf("AdlerInformation: speaker '%s' has %zu vector(s), need >= 2",
               id.c_str(), vecs.size()));

  const int m = ds.Dim();
  std::vector<const Vector *> all;
  all.reserve(ds.NumVectors());
  for (const auto &[id, vecs] : ds.Speakers())
    for (const auto &v : vecs) all.push_back(&v);
  GaussianModel population = FitGaussian(all);
  if (ridge < 0.0) ridge = 1e-6 * population.covariance.trace() / m;

  GaussianModel q;
  q.mean = population.mean;
  q.covariance = population.covariance + ridge * Matrix::Identity(m, m);
  {
    Eigen::LLT<Matrix> llt(q.covariance);
    if (llt.info() != Eigen::Success)
      throw NumericalError(
          Strf("AdlerInformation: population covariance singular "
               "(ridge %g too small; increase it)", ridge));
  }

  double total_bits = 0.0;
  for (const auto &[id, vecs] : ds.Speakers()) {
    std::vector<const Vector *> own;
    own.reserve(vecs.size());
    for (const auto &v : vecs) own.push_back(&v);
    GaussianModel p = FitGaussian(own);
    p.covariance = (1.0 - lambda) * p.covariance +
                   lambda * population.covariance +
                   ridge * Matrix::Identity(m, m);
    total_bits += KlGaussianBits(p, q);
  }
  AdlerResult result;
  result.bits = total_bits / static_cast<double>(ds.NumSpeakers());
  result.lambda = lambda;
  result.ridge = ridge;
  result.n_speakers = static_cast<long long>(ds.NumSpeakers());
  return result;
}

// Discrete KL(genuine || impostor) in bits over shared-support histograms of
// the two score sets, with add-epsilon smoothing so no impostor bin is empty.
inline double ScoreSpaceKlBits(std::span<const double> genuine,
                               std::span<const double> impostor, int n_bins) {
  if (genuine.size() < 2 || impostor.size() < 2)
    throw InsufficientDataError(
        "ScoreSpaceKlBits: need at least 2 scores in each set");
  if (n_bins < 2) throw ValidationError("ScoreSpaceKlBits: n_bins must be >= 2");
  double lo = genuine[0], hi = genuine[0];
  for (double s : genuine) { lo = std::min(lo, s); hi = std::max(hi, s); }
  for (double s : impostor) { lo = std::min(lo, s); hi = std::max(hi, s); }
  if (!(hi > lo)) return 0.0;  // all scores identical

  const double width = (hi - lo) / n_bins;
  auto histogram = [&](std::span<const double> scores) {
    std::vector<double> counts(n_bins, 0.0);
    for (double s : scores) {
      int bin = static_cast<int>((s - lo) / width);
      counts[std::clamp(bin, 0, n_bins - 1)] += 1.0;
    }
    return counts;
  };
  const std::vector<double> cg = histogram(genuine);
  const std::vector<double> ci = histogram(impostor);
  const double total = static_cast<double>(genuine.size() + impostor.size());
  const double eps = 1.0 / (10.0 * total);
  const double zg = static_cast<double>(genuine.size()) + n_bins * eps;
  const double zi = static_cast<double>(impostor.size()) + n_bins * eps;
  double kl = 0.0;
  for (int b = 0; b < n_bins; ++b) {
    const double p = (cg[b] + eps) / zg;
    const double q = (ci[b] + eps) / zi;
    kl += p * std::log2(p / q);
  }
  return kl;
}

}  // namespace vuniq

#endif  // VUNIQ_BASELINES_HPP_
