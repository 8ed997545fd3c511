// vuniq/dataset.hpp

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

#ifndef VUNIQ_DATASET_HPP_
#define VUNIQ_DATASET_HPP_

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vuniq/common.hpp"
#include "vuniq/rng.hpp"

namespace vuniq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

static_assert(std::endian::native == std::endian::little,
              "binary dataset format assumes a little-endian host");

enum class FileFormat { kCsv, kBinary };

inline FileFormat InferFormat(const std::string &path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return FileFormat::kCsv;
  return FileFormat::kBinary;
}

struct Manifest {
  std::string source;
  std::optional<double> duration_s;

  bool Empty() const { return source.empty() && !duration_s.has_value(); }
  bool operator==(const Manifest &) const = default;
};

// Speaker-labeled collection of fixed-dimension feature vectors.  Speakers
// iterate in lexicographic id order; the dataset is immutable once built and
// safe to share across threads.
class SpeakerDataset {
 public:
  using SpeakerMap = std::map<std::string, std::vector<Vector>>;

  SpeakerDataset() = default;
  explicit SpeakerDataset(int dim) : dim_(dim) {
    if (dim <= 0) throw ValidationError("dataset dimension must be positive");
  }

  void Add(const std::string &speaker_id, Vector v) {
    if (speaker_id.empty())
      throw ValidationError("speaker id must be non-empty");
    if (dim_ == 0) dim_ = static_cast<int>(v.size());
    if (v.size() != dim_)
      throw DimensionMismatchError(
          Strf("vector for speaker '%s' has dimension %d, dataset has %d",
               speaker_id.c_str(), static_cast<int>(v.size()), dim_));
    for (int j = 0; j < v.size(); ++j) {
      if (!std::isfinite(v[j]))
        throw ValidationError(
            Strf("non-finite value at dimension %d for speaker '%s'", j,
                 speaker_id.c_str()));
    }
    speakers_[speaker_id].push_back(std::move(v));
  }

  int Dim() const { return dim_; }
  std::size_t NumSpeakers() const { return speakers_.size(); }

  std::size_t NumVectors() const {
    std::size_t n = 0;
    for (const auto &[id, vecs] : speakers_) n += vecs.size();
    return n;
  }

  const SpeakerMap &Speakers() const { return speakers_; }

  std::vector<std::string> SpeakerIds() const {
    std::vector<std::string> ids;
    ids.reserve(speakers_.size());
    for (const auto &[id, vecs] : speakers_) ids.push_back(id);
    return ids;
  }

  const std::vector<Vector> &VectorsOf(const std::string &id) const {
    auto it = speakers_.find(id);
    if (it == speakers_.end())
      throw ValidationError(Strf("unknown speaker '%s'", id.c_str()));
    return it->second;
  }

  Manifest &ManifestInfo() { return manifest_; }
  const Manifest &ManifestInfo() const { return manifest_; }

  bool operator==(const SpeakerDataset &other) const {
    if (dim_ != other.dim_ || manifest_ != other.manifest_) return false;
    if (speakers_.size() != other.speakers_.size()) return false;
    auto it = speakers_.begin(), jt = other.speakers_.begin();
    for (; it != speakers_.end(); ++it, ++jt) {
      if (it->first != jt->first) return false;
      if (it->second.size() != jt->second.size()) return false;
      for (std::size_t k = 0; k < it->second.size(); ++k)
        if (it->second[k] != jt->second[k]) return false;
    }
    return true;
  }

 private:
  int dim_ = 0;
  SpeakerMap speakers_;
  Manifest manifest_;
};

// Element-wise discretized counterpart of a feature vector.
struct QuantizedVector {
  std::vector<uint8_t> codes;
  int bits = 0;
};

// Speaker-labeled collection of quantized vectors; all codes below 2^bits.
class QuantizedDataset {
 public:
  using SpeakerMap = std::map<std::string, std::vector<std::vector<uint8_t>>>;

  QuantizedDataset() = default;
  QuantizedDataset(int dim, int bits) : dim_(dim), bits_(bits) {
    if (dim <= 0) throw ValidationError("dimension must be positive");
    if (bits < 1 || bits > 8)
      throw ValidationError(Strf("bits=%d outside [1,8]", bits));
  }

  void Add(const std::string &speaker_id, std::vector<uint8_t> codes) {
    if (speaker_id.empty())
      throw ValidationError("speaker id must be non-empty");
    if (static_cast<int>(codes.size()) != dim_)
      throw DimensionMismatchError(
          Strf("code vector has dimension %zu, dataset has %d", codes.size(),
               dim_));
    const int limit = 1 << bits_;
    for (uint8_t c : codes)
      if (c >= limit)
        throw ValidationError(
            Strf("code %d out of range for %d bits", int(c), bits_));
    speakers_[speaker_id].push_back(std::move(codes));
  }

  int Dim() const { return dim_; }
  int Bits() const { return bits_; }
  int AlphabetSize() const { return 1 << bits_; }
  std::size_t NumSpeakers() const { return speakers_.size(); }

  std::size_t NumVectors() const {
    std::size_t n = 0;
    for (const auto &[id, vecs] : speakers_) n += vecs.size();
    return n;
  }

  const SpeakerMap &Speakers() const { return speakers_; }

  bool operator==(const QuantizedDataset &other) const = default;

 private:
  int dim_ = 0;
  int bits_ = 1;
  SpeakerMap speakers_;
};

namespace detail {

inline void WriteU16(std::ostream &os, uint16_t v) {
  os.write(reinterpret_cast<const char *>(&v), 2);
}
inline void WriteU32(std::ostream &os, uint32_t v) {
  os.write(reinterpret_cast<const char *>(&v), 4);
}
inline void WriteU64(std::ostream &os, uint64_t v) {
  os.write(reinterpret_cast<const char *>(&v), 8);
}
inline void WriteF64(std::ostream &os, double v) {
  os.write(reinterpret_cast<const char *>(&v), 8);
}

template <typename T>
T ReadPod(std::istream &is, const char *what) {
  T v;
  is.read(reinterpret_cast<char *>(&v), sizeof(T));
  if (!is) throw ParseError(Strf("truncated file while reading %s", what));
  return v;
}

inline double ParseDouble(std::string_view field, std::size_t line,
                          std::size_t column) {
  double value = 0.0;
  const char *begin = field.data();
  const char *end = begin + field.size();
  if (!field.empty() && field.front() == '+') ++begin;  // from_chars rejects '+'
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(Strf("line %zu, column %zu: cannot parse '%.*s' as a number",
                          line, column, static_cast<int>(field.size()),
                          field.data()));
  return value;
}

inline std::vector<std::string_view> SplitCsvLine(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

}  // namespace detail

inline std::string ManifestPath(const std::string &path) {
  return path + ".manifest.json";
}

inline void SaveManifest(const Manifest &m, const std::string &dataset_path) {
  if (m.Empty()) return;
  nlohmann::json j;
  j["source"] = m.source;
  if (m.duration_s) j["duration_s"] = *m.duration_s;
  std::ofstream os(ManifestPath(dataset_path));
  if (!os) throw IoError(Strf("cannot write %s", ManifestPath(dataset_path).c_str()));
  os << j.dump(2) << "\n";
}

inline Manifest LoadManifestIfPresent(const std::string &dataset_path) {
  Manifest m;
  std::ifstream is(ManifestPath(dataset_path));
  if (!is) return m;
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(Strf("bad manifest %s: %s",
                          ManifestPath(dataset_path).c_str(), e.what()));
  }
  if (j.contains("source")) m.source = j["source"].get<std::string>();
  if (j.contains("duration_s")) m.duration_s = j["duration_s"].get<double>();
  return m;
}

// CSV layout: header "speaker_id,f0,...,f{m-1}", then one record per vector.
inline SpeakerDataset LoadCsv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw ParseError("line 1: missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = detail::SplitCsvLine(line);
  if (header.size() < 2 || header[0] != "speaker_id")
    throw ParseError("line 1: header must be 'speaker_id,f0,f1,...'");
  const int dim = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < dim; ++j) {
    if (header[j + 1] != "f" + std::to_string(j))
      throw ParseError(Strf("line 1: expected column 'f%d', found '%.*s'", j,
                            static_cast<int>(header[j + 1].size()),
                            header[j + 1].data()));
  }

  SpeakerDataset ds(dim);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::SplitCsvLine(line);
    if (static_cast<int>(fields.size()) != dim + 1)
      throw DimensionMismatchError(
          Strf("line %zu: expected %d values, found %zu", line_no, dim,
               fields.size() - 1));
    if (fields[0].empty())
      throw ParseError(Strf("line %zu: empty speaker id", line_no));
    Vector v(dim);
    for (int j = 0; j < dim; ++j)
      v[j] = detail::ParseDouble(fields[j + 1], line_no, j + 2);
    for (int j = 0; j < dim; ++j)
      if (!std::isfinite(v[j]))
        throw ValidationError(
            Strf("line %zu: non-finite value in column f%d", line_no, j));
    ds.Add(std::string(fields[0]), std::move(v));
  }
  return ds;
}

inline void SaveCsv(const SpeakerDataset &ds, std::ostream &os) {
  os << "speaker_id";
  for (int j = 0; j < ds.Dim(); ++j) os << ",f" << j;
  os << "\n";
  char buf[40];
  for (const auto &[id, vecs] : ds.Speakers()) {
    for (const auto &v : vecs) {
      os << id;
      for (int j = 0; j < ds.Dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[j]);
        os << ',' << buf;
      }
      os << "\n";
    }
  }
}

constexpr char kBinaryMagic[4] = {'B', 'I', 'O', 'V'};
constexpr uint32_t kBinaryVersion = 1;

inline void SaveBinary(const SpeakerDataset &ds, std::ostream &os) {
  os.write(kBinaryMagic, 4);
  detail::WriteU32(os, kBinaryVersion);
  detail::WriteU32(os, static_cast<uint32_t>(ds.Dim()));
  detail::WriteU64(os, static_cast<uint64_t>(ds.NumVectors()));
  for (const auto &[id, vecs] : ds.Speakers()) {
    if (id.size() > 0xffff)
      throw ValidationError(Strf("speaker id '%s...' longer than 65535 bytes",
                                 id.substr(0, 16).c_str()));
    for (const auto &v : vecs) {
      detail::WriteU16(os, static_cast<uint16_t>(id.size()));
      os.write(id.data(), static_cast<std::streamsize>(id.size()));
      for (int j = 0; j < ds.Dim(); ++j) detail::WriteF64(os, v[j]);
    }
  }
}

inline SpeakerDataset LoadBinary(std::istream &is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kBinaryMagic, 4) != 0)
    throw ParseError("offset 0: bad magic, not a BIOV dataset file");
  uint32_t version = detail::ReadPod<uint32_t>(is, "version");
  if (version != kBinaryVersion)
    throw ParseError(Strf("unsupported format version %u", version));
  uint32_t dim = detail::ReadPod<uint32_t>(is, "dimension");
  if (dim == 0) throw ParseError("offset 8: dimension must be positive");
  uint64_t count = detail::ReadPod<uint64_t>(is, "record count");
  SpeakerDataset ds(static_cast<int>(dim));
  std::string id;
  for (uint64_t r = 0; r < count; ++r) {
    uint16_t id_len = detail::ReadPod<uint16_t>(is, "speaker id length");
    id.resize(id_len);
    is.read(id.data(), id_len);
    if (!is) throw ParseError(Strf("record %llu: truncated speaker id",
                                   static_cast<unsigned long long>(r)));
    Vector v(static_cast<int>(dim));
    for (uint32_t j = 0; j < dim; ++j)
      v[j] = detail::ReadPod<double>(is, "feature value");
    try {
      ds.Add(id, std::move(v));
    } catch (const ValidationError &e) {
      throw ValidationError(Strf("record %llu: %s",
                                 static_cast<unsigned long long>(r), e.what()));
    }
  }
  return ds;
}

inline SpeakerDataset LoadDataset(const std::string &path,
                                  std::optional<FileFormat> format = {}) {
  FileFormat f = format.value_or(InferFormat(path));
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(Strf("cannot open %s", path.c_str()));
  SpeakerDataset ds = (f == FileFormat::kCsv) ? LoadCsv(is) : LoadBinary(is);
  if (ds.NumSpeakers() == 0)
    throw ValidationError(Strf("%s contains no records", path.c_str()));
  ds.ManifestInfo() = LoadManifestIfPresent(path);
  return ds;
}

inline void SaveDataset(const SpeakerDataset &ds, const std::string &path,
                        std::optional<FileFormat> format = {}) {
  FileFormat f = format.value_or(InferFormat(path));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(Strf("cannot write %s", path.c_str()));
  if (f == FileFormat::kCsv)
    SaveCsv(ds, os);
  else
    SaveBinary(ds, os);
  SaveManifest(ds.ManifestInfo(), path);
}

// Partitions speakers into two datasets with disjoint id sets.  The dev side
// receives round(dev_fraction * n) speakers chosen by seeded shuffle.
inline std::pair<SpeakerDataset, SpeakerDataset> SplitBySpeaker(
    const SpeakerDataset &ds, double dev_fraction, uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
    throw ValidationError(Strf("dev_fraction=%g outside (0,1)", dev_fraction));
  if (ds.NumSpeakers() < 2)
    throw InsufficientDataError("split requires at least 2 speakers");
  std::vector<std::string> ids = ds.SpeakerIds();
  SplitMix64 rng(seed);
  SeededShuffle(ids, rng);
  const auto dev_n = static_cast<std::size_t>(
      std::llround(dev_fraction * static_cast<double>(ids.size())));
  SpeakerDataset dev(ds.Dim()), measure(ds.Dim());
  dev.ManifestInfo() = ds.ManifestInfo();
  measure.ManifestInfo() = ds.ManifestInfo();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    SpeakerDataset &target = (i < dev_n) ? dev : measure;
    for (const auto &v : ds.VectorsOf(ids[i])) target.Add(ids[i], v);
  }
  return {std::move(dev), std::move(measure)};
}

// Selects exactly n_speakers speakers with exactly k_samples vectors each.
// Speaker selection uses the master seed; the per-speaker vector shuffle is
// keyed by the speaker id so the outcome does not depend on which other
// speakers qualify.
inline SpeakerDataset Subsample(const SpeakerDataset &ds, std::size_t n_speakers,
                                std::size_t k_samples, uint64_t seed) {
  if (n_speakers == 0 || k_samples == 0)
    throw ValidationError("subsample sizes must be positive");
  std::vector<std::string> qualifying;
  for (const auto &[id, vecs] : ds.Speakers())
    if (vecs.size() >= k_samples) qualifying.push_back(id);
  if (qualifying.size() < n_speakers)
    throw InsufficientDataError(
        Strf("requested %zu speakers with >= %zu samples, only %zu qualify",
             n_speakers, k_samples, qualifying.size()));
  SplitMix64 rng(MixSeed(seed, 0x5e1ec7));
  SeededShuffle(qualifying, rng);
  qualifying.resize(n_speakers);

  SpeakerDataset out(ds.Dim());
  out.ManifestInfo() = ds.ManifestInfo();
  for (const auto &id : qualifying) {
    const auto &vecs = ds.VectorsOf(id);
    std::vector<std::size_t> order(vecs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    SplitMix64 spk_rng(MixSeed(seed, Fnv1a64(id)));
    SeededShuffle(order, spk_rng);
    for (std::size_t i = 0; i < k_samples; ++i) out.Add(id, vecs[order[i]]);
  }
  return out;
}

}  // namespace vuniq

#endif  // VUNIQ_DATASET_HPP_
