// vuniq/entropy.hpp

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

#ifndef VUNIQ_ENTROPY_HPP_
#define VUNIQ_ENTROPY_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"

namespace vuniq {

// Plug-in entropy of the empirical code distribution, in bits, with the
// convention 0*log(0) = 0.  No bias correction is applied; the sample-count
// bias is part of what the measure reports.
inline double ElementEntropy(std::span<const uint8_t> codes,
                             int alphabet_size) {
  if (codes.empty()) throw EmptyInputError("ElementEntropy: empty code sequence");
  if (alphabet_size < 1)
    throw ValidationError("ElementEntropy: alphabet size must be positive");
  std::vector<std::size_t> counts(static_cast<std::size_t>(alphabet_size), 0);
  for (uint8_t c : codes) {
    if (c >= alphabet_size)
      throw ValidationError(
          Strf("ElementEntropy: code %d outside alphabet of size %d", int(c),
               alphabet_size));
    ++counts[c];
  }
  const double n = static_cast<double>(codes.size());
  double h = 0.0;
  for (std::size_t count : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / n;
    h -= p * std::log2(p);
  }
  return h;
}

namespace detail {

// Per-dimension code histograms in one pass; integer counts make the
// parallel/serial results identical.
inline std::vector<double> PerDimensionEntropies(const QuantizedDataset &qds) {
  const int dim = qds.Dim();
  const int alphabet = qds.AlphabetSize();
  std::vector<std::vector<std::size_t>> counts(
      dim, std::vector<std::size_t>(alphabet, 0));
  std::size_t n = 0;
  for (const auto &[id, vecs] : qds.Speakers()) {
    for (const auto &codes : vecs) {
      for (int j = 0; j < dim; ++j) ++counts[j][codes[j]];
      ++n;
    }
  }
  std::vector<double> entropies(dim, 0.0);
  for (int j = 0; j < dim; ++j) {
    double h = 0.0;
    for (int c = 0; c < alphabet; ++c) {
      if (counts[j][c] == 0) continue;
      const double p =
          static_cast<double>(counts[j][c]) / static_cast<double>(n);
      h -= p * std::log2(p);
    }
    entropies[j] = h;
  }
  return entropies;
}

}  // namespace detail

// H(V): sum over dimensions of the element entropy, pooled over all vectors
// of all speakers.  Treats dimensions as independent.
inline double VectorEntropy(const QuantizedDataset &qds) {
  if (qds.NumVectors() == 0) throw EmptyInputError("VectorEntropy: empty dataset");
  double total = 0.0;
  for (double h : detail::PerDimensionEntropies(qds)) total += h;
  return total;
}

// H(V|S): average over speakers (uniform speaker prior) of the per-speaker
// sum of element entropies.
inline double ConditionalEntropy(const QuantizedDataset &qds) {
  if (qds.NumVectors() == 0)
    throw EmptyInputError("ConditionalEntropy: empty dataset");
  const int dim = qds.Dim();
  const int alphabet = qds.AlphabetSize();
  std::vector<const std::vector<std::vector<uint8_t>> *> speakers;
  speakers.reserve(qds.NumSpeakers());
  for (const auto &[id, vecs] : qds.Speakers()) speakers.push_back(&vecs);

  std::vector<double> per_speaker(speakers.size(), 0.0);
  ParallelFor(speakers.size(), [&](std::size_t i) {
    std::vector<std::size_t> counts(alphabet, 0);
    const auto &vecs = *speakers[i];
    double h_speaker = 0.0;
    for (int j = 0; j < dim; ++j) {
      std::fill(counts.begin(), counts.end(), 0);
      for (const auto &codes : vecs) ++counts[codes[j]];
      const double n = static_cast<double>(vecs.size());
      for (int c = 0; c < alphabet; ++c) {
        if (counts[c] == 0) continue;
        const double p = static_cast<double>(counts[c]) / n;
        h_speaker -= p * std::log2(p);
      }
    }
    per_speaker[i] = h_speaker;
  });
  double total = 0.0;
  for (double h : per_speaker) total += h;  // fixed index order
  return total / static_cast<double>(speakers.size());
}

// The uniqueness measure for one configuration: population entropy,
// within-speaker entropy, and their difference, all in bits.
struct UniquenessEstimate {
  double h_population = 0.0;
  double h_within = 0.0;
  double i_bits = 0.0;  // always h_population - h_within
  int bits = 0;
  long long n_speakers = 0;
  long long k_samples = 0;  // 0 when speakers have unequal sample counts
};

// log2(n) is reported next to the estimate for context (it bounds H(S)); no
// relation between the two is asserted.
inline nlohmann::json EstimateToJson(const UniquenessEstimate &e) {
  return nlohmann::json{{"h_population", e.h_population},
                        {"h_within", e.h_within},
                        {"i_bits", e.i_bits},
                        {"bits", e.bits},
                        {"n_speakers", e.n_speakers},
                        {"k_samples", e.k_samples},
                        {"log2_n_speakers",
                         std::log2(static_cast<double>(e.n_speakers))}};
}

// I(S;V) = H(V) - H(V|S) over the quantized dataset.
inline UniquenessEstimate MutualInformation(const QuantizedDataset &qds) {
  UniquenessEstimate est;
  est.h_population = VectorEntropy(qds);
  est.h_within = ConditionalEntropy(qds);
  est.i_bits = est.h_population - est.h_within;
  est.bits = qds.Bits();
  est.n_speakers = static_cast<long long>(qds.NumSpeakers());
  std::size_t k = qds.Speakers().begin()->second.size();
  for (const auto &[id, vecs] : qds.Speakers())
    if (vecs.size() != k) { k = 0; break; }
  est.k_samples = static_cast<long long>(k);
  return est;
}

}  // namespace vuniq

#endif  // VUNIQ_ENTROPY_HPP_
