// vuniq/quantizer.hpp

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

#ifndef VUNIQ_QUANTIZER_HPP_
#define VUNIQ_QUANTIZER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"

namespace vuniq {

// MSE-optimal scalar quantizer.  Cell c covers (boundaries[c-1], boundaries[c]]
// with levels[c] inside it; a value exactly on a boundary belongs to the lower
// cell.
struct ScalarQuantizer {
  int bits = 0;
  std::vector<double> boundaries;  // 2^bits - 1, strictly increasing
  std::vector<double> levels;      // 2^bits, strictly increasing
  double distortion = 0.0;         // final training MSE
  std::vector<double> mse_trace;   // per-iteration training MSE

  int Cells() const { return 1 << bits; }
};

inline int QuantizeValue(const ScalarQuantizer &q, double x) {
  // Number of boundaries strictly below x; ties go to the lower cell.
  auto it = std::lower_bound(q.boundaries.begin(), q.boundaries.end(), x);
  return static_cast<int>(it - q.boundaries.begin());
}

namespace detail {

// Linearly interpolated empirical quantile of a sorted sample.
inline double SortedQuantile(const std::vector<double> &sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline bool StrictlyIncreasing(const std::vector<double> &v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i - 1] < v[i])) return false;
  return true;
}

}  // namespace detail

// Lloyd-Max training: alternate nearest-boundary updates (midpoints of
// adjacent levels) and centroid updates (cell means) until the relative MSE
// improvement drops below tol.  Levels start at the 2^bits quantile midpoints
// of the sample, which is deterministic and leaves no cell empty at start;
// a cell emptied during iteration is re-seeded at the midpoint of its
// bounding boundaries, which cannot increase the MSE.
inline ScalarQuantizer TrainLloydMax(std::vector<double> samples, int bits,
                                     double tol = 1e-7, int max_iter = 200) {
  if (samples.empty()) throw EmptyInputError("Lloyd-Max: empty sample set");
  if (bits < 1 || bits > 8)
    throw ValidationError(Strf("Lloyd-Max: bits=%d outside [1,8]", bits));
  if (!(tol > 0.0)) throw ValidationError("Lloyd-Max: tol must be positive");
  if (max_iter < 1) throw ValidationError("Lloyd-Max: max_iter must be >= 1");
  for (double x : samples)
    if (!std::isfinite(x))
      throw ValidationError("Lloyd-Max: non-finite sample value");

  std::sort(samples.begin(), samples.end());
  const int cells = 1 << bits;

  std::vector<double> unique_vals;
  unique_vals.reserve(samples.size());
  for (double x : samples)
    if (unique_vals.empty() || unique_vals.back() != x) unique_vals.push_back(x);
  if (static_cast<int>(unique_vals.size()) < cells)
    throw DegenerateInputError(
        Strf("Lloyd-Max: %zu distinct values, need at least %d for %d bits",
             unique_vals.size(), cells, bits));

  ScalarQuantizer q;
  q.bits = bits;
  q.levels.resize(cells);
  for (int c = 0; c < cells; ++c)
    q.levels[c] =
        detail::SortedQuantile(samples, (static_cast<double>(c) + 0.5) / cells);
  if (!detail::StrictlyIncreasing(q.levels)) {
    // Heavy ties can collapse quantile midpoints; fall back to quantiles of
    // the distinct values, which are strictly increasing by construction.
    for (int c = 0; c < cells; ++c) {
      auto idx = static_cast<std::size_t>(
          (static_cast<double>(c) + 0.5) / cells *
          static_cast<double>(unique_vals.size()));
      q.levels[c] = unique_vals[std::min(idx, unique_vals.size() - 1)];
    }
  }

  q.boundaries.resize(cells - 1);
  const auto n = static_cast<double>(samples.size());
  std::vector<std::size_t> cell_begin(cells + 1);

  auto update_boundaries = [&]() {
    for (int c = 0; c + 1 < cells; ++c)
      q.boundaries[c] = 0.5 * (q.levels[c] + q.levels[c + 1]);
    cell_begin[0] = 0;
    for (int c = 0; c + 1 < cells; ++c) {
      // First sample strictly above boundary c starts cell c+1.
      auto it = std::upper_bound(samples.begin(), samples.end(),
                                 q.boundaries[c]);
      cell_begin[c + 1] = static_cast<std::size_t>(it - samples.begin());
    }
    cell_begin[cells] = samples.size();
  };

  auto current_mse = [&]() {
    double sum = 0.0;
    for (int c = 0; c < cells; ++c)
      for (std::size_t i = cell_begin[c]; i < cell_begin[c + 1]; ++i) {
        const double d = samples[i] - q.levels[c];
        sum += d * d;
      }
    return sum / n;
  };

  update_boundaries();
  double mse = current_mse();
  q.mse_trace.push_back(mse);

  for (int iter = 0; iter < max_iter; ++iter) {
    for (int c = 0; c < cells; ++c) {
      const std::size_t lo = cell_begin[c], hi = cell_begin[c + 1];
      if (hi > lo) {
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += samples[i];
        q.levels[c] = sum / static_cast<double>(hi - lo);
      } else {
        const double left = (c == 0) ? samples.front() : q.boundaries[c - 1];
        const double right =
            (c == cells - 1) ? samples.back() : q.boundaries[c];
        q.levels[c] = 0.5 * (left + right);
      }
    }
    update_boundaries();
    const double next_mse = current_mse();
    q.mse_trace.push_back(next_mse);
    const double improvement = mse - next_mse;
    mse = next_mse;
    if (improvement < tol * std::max(mse, 1e-300)) break;
  }

  if (!detail::StrictlyIncreasing(q.levels) ||
      !detail::StrictlyIncreasing(q.boundaries))
    throw NumericalError("Lloyd-Max: training produced non-increasing levels");
  q.distortion = mse;
  return q;
}

enum class Representation { kQuantumValue, kCodeword };

inline std::string RepresentationName(Representation r) {
  return r == Representation::kQuantumValue ? "quantum_value" : "codeword";
}

inline Representation RepresentationFromName(const std::string &s) {
  if (s == "quantum_value") return Representation::kQuantumValue;
  if (s == "codeword") return Representation::kCodeword;
  throw ConfigError(Strf("unknown representation '%s'", s.c_str()));
}

// Per-dimension scalar quantizers, all trained at the same bit depth.
struct QuantizerBank {
  std::vector<ScalarQuantizer> per_dim;
  Representation representation = Representation::kQuantumValue;

  int Bits() const { return per_dim.empty() ? 0 : per_dim.front().bits; }
  int Dim() const { return static_cast<int>(per_dim.size()); }
};

// Trains one quantizer per dimension on the pooled samples of that dimension.
// Dimensions are independent, so parallel training is bitwise-identical to
// serial training.
inline QuantizerBank TrainQuantizerBank(
    const SpeakerDataset &dev, int bits, double tol = 1e-7, int max_iter = 200,
    Representation representation = Representation::kQuantumValue) {
  if (dev.NumVectors() == 0) throw EmptyInputError("empty training dataset");
  QuantizerBank bank;
  bank.representation = representation;
  bank.per_dim.resize(dev.Dim());
  ParallelFor(static_cast<std::size_t>(dev.Dim()), [&](std::size_t j) {
    std::vector<double> column;
    column.reserve(dev.NumVectors());
    for (const auto &[id, vecs] : dev.Speakers())
      for (const auto &v : vecs) column.push_back(v[static_cast<int>(j)]);
    bank.per_dim[j] = TrainLloydMax(std::move(column), bits, tol, max_iter);
  });
  return bank;
}

inline QuantizedVector Quantize(const QuantizerBank &bank, const Vector &v) {
  if (v.size() != bank.Dim())
    throw DimensionMismatchError(Strf("vector dimension %d, bank has %d",
                                      static_cast<int>(v.size()), bank.Dim()));
  QuantizedVector out;
  out.bits = bank.Bits();
  out.codes.resize(bank.per_dim.size());
  for (std::size_t j = 0; j < bank.per_dim.size(); ++j)
    out.codes[j] = static_cast<uint8_t>(
        QuantizeValue(bank.per_dim[j], v[static_cast<int>(j)]));
  return out;
}

inline Vector Dequantize(const QuantizerBank &bank, const QuantizedVector &qv) {
  if (static_cast<int>(qv.codes.size()) != bank.Dim())
    throw DimensionMismatchError(Strf("code dimension %zu, bank has %d",
                                      qv.codes.size(), bank.Dim()));
  Vector v(bank.Dim());
  for (std::size_t j = 0; j < qv.codes.size(); ++j) {
    const ScalarQuantizer &q = bank.per_dim[j];
    if (qv.codes[j] >= q.Cells())
      throw ValidationError(
          Strf("code %d out of range for %d bits", int(qv.codes[j]), q.bits));
    v[static_cast<int>(j)] =
        bank.representation == Representation::kQuantumValue
            ? q.levels[qv.codes[j]]
            : static_cast<double>(qv.codes[j]);
  }
  return v;
}

inline QuantizedDataset QuantizeDataset(const QuantizerBank &bank,
                                        const SpeakerDataset &ds) {
  if (ds.Dim() != bank.Dim())
    throw DimensionMismatchError(Strf("dataset dimension %d, bank has %d",
                                      ds.Dim(), bank.Dim()));
  QuantizedDataset out(ds.Dim(), bank.Bits());
  for (const auto &[id, vecs] : ds.Speakers())
    for (const auto &v : vecs) out.Add(id, Quantize(bank, v).codes);
  return out;
}

// Quantize-then-reconstruct: the discretized real-valued dataset that the
// verification pipeline consumes.
inline SpeakerDataset DiscretizeDataset(const QuantizerBank &bank,
                                        const SpeakerDataset &ds) {
  SpeakerDataset out(ds.Dim());
  out.ManifestInfo() = ds.ManifestInfo();
  for (const auto &[id, vecs] : ds.Speakers())
    for (const auto &v : vecs) out.Add(id, Dequantize(bank, Quantize(bank, v)));
  return out;
}

inline nlohmann::json BankToJson(const QuantizerBank &bank) {
  nlohmann::json j;
  j["bits"] = bank.Bits();
  j["representation"] = RepresentationName(bank.representation);
  nlohmann::json dims = nlohmann::json::array();
  for (const auto &q : bank.per_dim) {
    nlohmann::json d;
    d["boundaries"] = q.boundaries;
    d["levels"] = q.levels;
    dims.push_back(std::move(d));
  }
  j["per_dim"] = std::move(dims);
  return j;
}

inline QuantizerBank BankFromJson(const nlohmann::json &j) {
  QuantizerBank bank;
  try {
    bank.representation =
        RepresentationFromName(j.at("representation").get<std::string>());
    const int bits = j.at("bits").get<int>();
    if (bits < 1 || bits > 8)
      throw ValidationError(Strf("bank bits=%d outside [1,8]", bits));
    for (const auto &d : j.at("per_dim")) {
      ScalarQuantizer q;
      q.bits = bits;
      q.boundaries = d.at("boundaries").get<std::vector<double>>();
      q.levels = d.at("levels").get<std::vector<double>>();
      if (static_cast<int>(q.levels.size()) != q.Cells() ||
          static_cast<int>(q.boundaries.size()) != q.Cells() - 1)
        throw ValidationError("bank entry has inconsistent level count");
      if (!detail::StrictlyIncreasing(q.levels) ||
          !detail::StrictlyIncreasing(q.boundaries))
        throw ValidationError("bank entry not strictly increasing");
      bank.per_dim.push_back(std::move(q));
    }
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(Strf("bad quantizer bank JSON: %s", e.what()));
  }
  if (bank.per_dim.empty()) throw ValidationError("bank has no dimensions");
  return bank;
}

inline void SaveBank(const QuantizerBank &bank, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw IoError(Strf("cannot write %s", path.c_str()));
  os << BankToJson(bank).dump(2) << "\n";
}

inline QuantizerBank LoadBank(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw IoError(Strf("cannot open %s", path.c_str()));
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(Strf("bad quantizer bank %s: %s", path.c_str(), e.what()));
  }
  return BankFromJson(j);
}

}  // namespace vuniq

#endif  // VUNIQ_QUANTIZER_HPP_
