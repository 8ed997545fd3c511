// vuniq/experiment.hpp

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

#ifndef VUNIQ_EXPERIMENT_HPP_
#define VUNIQ_EXPERIMENT_HPP_

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vuniq/backend.hpp"
#include "vuniq/baselines.hpp"
#include "vuniq/common.hpp"
#include "vuniq/dataset.hpp"
#include "vuniq/entropy.hpp"
#include "vuniq/quantizer.hpp"
#include "vuniq/report.hpp"
#include "vuniq/synth.hpp"

namespace vuniq {

inline const std::set<std::string> kKnownMeasures = {
    "mutual_info", "daugman", "adler", "score_kl"};

// Declarative description of one experiment run: input data, the dev/measure
// split, quantizer depths, sweep axes, measures, and backend parameters.
struct ExperimentConfig {
  // Exactly one of the two inputs is set.
  std::string input_path;
  std::optional<FileFormat> input_format;
  std::optional<PopulationSpec> synthetic;

  double dev_fraction = 0.5;
  uint64_t seed = 42;
  std::vector<int> bits;
  std::vector<long long> sweep_speakers = {0};  // 0: all qualifying speakers
  std::vector<long long> sweep_samples = {0};   // 0: all samples per speaker
  std::vector<std::string> measures;

  int lda_dim = 0;
  int plda_dim = -1;
  int em_iters = 10;

  bool eer_enabled = false;
  long long eer_subset_speakers = 0;  // 0: all eligible
  bool eer_include_float = true;
  uint64_t trial_seed = 1;

  double quantizer_tol = 1e-7;
  int quantizer_max_iter = 200;
  Representation representation = Representation::kQuantumValue;

  Pairing daugman_pairing = Pairing::kBetweenSpeaker;
  double adler_lambda = 0.5;
  double adler_ridge = -1.0;  // negative: automatic
  int score_kl_bins = 64;

  std::string output_dir;

  void Validate() const {
    if (input_path.empty() == !synthetic.has_value())
      throw ConfigError("config: set exactly one of input.path / input.synthetic");
    if (synthetic) synthetic->Validate();
    if (!(dev_fraction > 0.0 && dev_fraction < 1.0))
      throw ConfigError("config: dev_fraction must lie in (0,1)");
    if (measures.empty()) throw ConfigError("config: measures must be non-empty");
    for (const auto &m : measures)
      if (!kKnownMeasures.count(m))
        throw ConfigError(Strf("config: unknown measure '%s'", m.c_str()));
    for (int b : bits)
      if (b < 1 || b > 8)
        throw ConfigError(Strf("config: bits value %d outside [1,8]", b));
    const bool needs_bits =
        std::count(measures.begin(), measures.end(), "mutual_info") > 0;
    if (needs_bits && bits.empty())
      throw ConfigError("config: mutual_info requires a non-empty bits list");
    if (sweep_speakers.empty() || sweep_samples.empty())
      throw ConfigError("config: sweep axes must be non-empty");
    if (output_dir.empty()) throw ConfigError("config: output_dir is required");
    if (score_kl_bins < 2) throw ConfigError("config: score_kl bins must be >= 2");
  }
};

inline nlohmann::json ConfigToJson(const ExperimentConfig &cfg) {
  nlohmann::json input;
  if (cfg.synthetic) {
    input["synthetic"] = PopulationSpecToJson(*cfg.synthetic);
  } else {
    input["path"] = cfg.input_path;
    if (cfg.input_format)
      input["format"] =
          *cfg.input_format == FileFormat::kCsv ? "csv" : "binary";
  }
  return nlohmann::json{
      {"input", input},
      {"dev_fraction", cfg.dev_fraction},
      {"seed", cfg.seed},
      {"bits", cfg.bits},
      {"sweep",
       {{"n_speakers", cfg.sweep_speakers}, {"k_samples", cfg.sweep_samples}}},
      {"measures", cfg.measures},
      {"backend",
       {{"lda_dim", cfg.lda_dim},
        {"plda_dim", cfg.plda_dim},
        {"em_iters", cfg.em_iters}}},
      {"eer",
       {{"enabled", cfg.eer_enabled},
        {"subset_speakers", cfg.eer_subset_speakers},
        {"include_float", cfg.eer_include_float},
        {"trial_seed", cfg.trial_seed}}},
      {"quantizer",
       {{"tol", cfg.quantizer_tol},
        {"max_iter", cfg.quantizer_max_iter},
        {"representation", RepresentationName(cfg.representation)}}},
      {"daugman", {{"pairing", PairingName(cfg.daugman_pairing)}}},
      {"adler", {{"lambda", cfg.adler_lambda}, {"ridge", cfg.adler_ridge}}},
      {"score_kl", {{"bins", cfg.score_kl_bins}}},
      {"output_dir", cfg.output_dir}};
}

inline ExperimentConfig ConfigFromJson(const nlohmann::json &j) {
  ExperimentConfig cfg;
  try {
    const auto &input = j.at("input");
    if (input.contains("synthetic"))
      cfg.synthetic = PopulationSpecFromJson(input.at("synthetic"));
    if (input.contains("path"))
      cfg.input_path = input.at("path").get<std::string>();
    if (input.contains("format")) {
      const auto f = input.at("format").get<std::string>();
      if (f == "csv") cfg.input_format = FileFormat::kCsv;
      else if (f == "binary") cfg.input_format = FileFormat::kBinary;
      else throw ConfigError(Strf("config: unknown input format '%s'", f.c_str()));
    }
    cfg.dev_fraction = j.value("dev_fraction", cfg.dev_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("bits")) cfg.bits = j.at("bits").get<std::vector<int>>();
    if (j.contains("sweep")) {
      const auto &s = j.at("sweep");
      if (s.contains("n_speakers"))
        cfg.sweep_speakers = s.at("n_speakers").get<std::vector<long long>>();
      if (s.contains("k_samples"))
        cfg.sweep_samples = s.at("k_samples").get<std::vector<long long>>();
    }
    if (j.contains("measures"))
      cfg.measures = j.at("measures").get<std::vector<std::string>>();
    if (j.contains("backend")) {
      const auto &b = j.at("backend");
      cfg.lda_dim = b.value("lda_dim", cfg.lda_dim);
      cfg.plda_dim = b.value("plda_dim", cfg.plda_dim);
      cfg.em_iters = b.value("em_iters", cfg.em_iters);
    }
    if (j.contains("eer")) {
      const auto &e = j.at("eer");
      cfg.eer_enabled = e.value("enabled", cfg.eer_enabled);
      cfg.eer_subset_speakers =
          e.value("subset_speakers", cfg.eer_subset_speakers);
      cfg.eer_include_float = e.value("include_float", cfg.eer_include_float);
      cfg.trial_seed = e.value("trial_seed", cfg.trial_seed);
    }
    if (j.contains("quantizer")) {
      const auto &q = j.at("quantizer");
      cfg.quantizer_tol = q.value("tol", cfg.quantizer_tol);
      cfg.quantizer_max_iter = q.value("max_iter", cfg.quantizer_max_iter);
      if (q.contains("representation"))
        cfg.representation =
            RepresentationFromName(q.at("representation").get<std::string>());
    }
    if (j.contains("daugman") && j.at("daugman").contains("pairing"))
      cfg.daugman_pairing =
          PairingFromName(j.at("daugman").at("pairing").get<std::string>());
    if (j.contains("adler")) {
      cfg.adler_lambda = j.at("adler").value("lambda", cfg.adler_lambda);
      cfg.adler_ridge = j.at("adler").value("ridge", cfg.adler_ridge);
    }
    if (j.contains("score_kl"))
      cfg.score_kl_bins = j.at("score_kl").value("bins", cfg.score_kl_bins);
    cfg.output_dir = j.value("output_dir", cfg.output_dir);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(Strf("bad experiment config: %s", e.what()));
  }
  cfg.Validate();
  return cfg;
}

inline ExperimentConfig LoadConfig(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(Strf("cannot open config %s", path.c_str()));
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(Strf("bad config %s: %s", path.c_str(), e.what()));
  }
  return ConfigFromJson(j);
}

struct ExperimentResult {
  std::vector<ReportTable> tables;
  std::vector<std::string> written_files;
};

namespace detail {

struct SweepCell {
  long long n_speakers = 0;
  long long k_samples = 0;
  uint64_t seed = 0;

  std::string Label() const {
    if (n_speakers == 0 && k_samples == 0) return "all";
    std::string label;
    if (n_speakers > 0) label += Strf("n=%lld", n_speakers);
    if (k_samples > 0) {
      if (!label.empty()) label += ",";
      label += Strf("k=%lld", k_samples);
    }
    return label;
  }
};

// Holds every per-cell number; filled in parallel, assembled serially.
struct CellOutcome {
  std::map<int, UniquenessEstimate> mi;  // by bits
  std::map<int, bool> mi_ok;
  double dof = 0.0;
  bool dof_ok = false;
  double adler_bits = 0.0;
  bool adler_ok = false;
  double score_kl = 0.0;
  bool score_kl_ok = false;
  std::string fatal_error;  // non-insufficiency failure
};

inline SpeakerDataset ResolveCell(const SpeakerDataset &measure,
                                  const SweepCell &cell) {
  if (cell.n_speakers == 0 && cell.k_samples == 0) return measure;
  long long k = cell.k_samples;
  if (k == 0) {
    // All samples requested: equalize at the smallest speaker count so the
    // subsample contract (exactly k each) stays satisfiable.
    std::size_t min_count = 0;
    for (const auto &[id, vecs] : measure.Speakers())
      min_count = min_count == 0 ? vecs.size()
                                 : std::min(min_count, vecs.size());
    k = static_cast<long long>(min_count);
  }
  long long n = cell.n_speakers;
  if (n == 0) {
    for (const auto &[id, vecs] : measure.Speakers())
      if (static_cast<long long>(vecs.size()) >= k) ++n;
    if (n == 0)
      throw InsufficientDataError(
          Strf("no speaker has %lld samples", k));
  }
  return Subsample(measure, static_cast<std::size_t>(n),
                   static_cast<std::size_t>(k), cell.seed);
}

inline SpeakerDataset SelectEligibleSpeakers(const SpeakerDataset &ds,
                                             long long n, uint64_t seed) {
  std::vector<std::string> eligible;
  for (const auto &[id, vecs] : ds.Speakers())
    if (vecs.size() >= 2) eligible.push_back(id);
  if (eligible.empty())
    throw InsufficientDataError("no speaker has 2+ samples for verification");
  if (n == 0) n = static_cast<long long>(eligible.size());
  if (static_cast<long long>(eligible.size()) < n)
    throw InsufficientDataError(
        Strf("requested %lld verification speakers, only %zu eligible", n,
             eligible.size()));
  SplitMix64 rng(MixSeed(seed, 0xEE5));
  SeededShuffle(eligible, rng);
  eligible.resize(static_cast<std::size_t>(n));
  SpeakerDataset out(ds.Dim());
  for (const auto &id : eligible)
    for (const auto &v : ds.VectorsOf(id)) out.Add(id, v);
  return out;
}

inline void WriteTextFile(const std::string &path, const std::string &text,
                          std::vector<std::string> *written) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(Strf("cannot write %s", path.c_str()));
  os << text;
  if (written) written->push_back(path);
}

}  // namespace detail

// Runs the full protocol: split, per-depth quantizer training, per-cell
// measurement, optional verification-EER comparison, report emission.
// Re-running an identical config writes byte-identical JSON regardless of
// the worker count.  output_dir_override redirects the artifacts without
// entering the resolved-config echo.
inline ExperimentResult RunExperiment(const ExperimentConfig &cfg,
                                      const std::string &output_dir_override =
                                          "") {
  cfg.Validate();
  namespace fs = std::filesystem;
  const std::string out_dir =
      output_dir_override.empty() ? cfg.output_dir : output_dir_override;
  fs::create_directories(out_dir);
  auto out_path = [&](const std::string &name) {
    return (fs::path(out_dir) / name).string();
  };

  ExperimentResult result;
  detail::WriteTextFile(out_path("resolved_config.json"),
                        ConfigToJson(cfg).dump(2) + "\n",
                        &result.written_files);

  SpeakerDataset dataset = cfg.synthetic
                               ? GeneratePopulation(*cfg.synthetic)
                               : LoadDataset(cfg.input_path, cfg.input_format);
  auto [dev, measure] = SplitBySpeaker(dataset, cfg.dev_fraction, cfg.seed);

  const bool want_mi =
      std::count(cfg.measures.begin(), cfg.measures.end(), "mutual_info") > 0;
  const bool want_daugman =
      std::count(cfg.measures.begin(), cfg.measures.end(), "daugman") > 0;
  const bool want_adler =
      std::count(cfg.measures.begin(), cfg.measures.end(), "adler") > 0;
  const bool want_score_kl =
      std::count(cfg.measures.begin(), cfg.measures.end(), "score_kl") > 0;

  std::vector<int> bank_bits = cfg.bits;
  if (want_daugman &&
      std::count(bank_bits.begin(), bank_bits.end(), 1) == 0)
    bank_bits.push_back(1);
  std::map<int, QuantizerBank> banks;
  for (int b : bank_bits)
    banks.emplace(b, TrainQuantizerBank(dev, b, cfg.quantizer_tol,
                                        cfg.quantizer_max_iter,
                                        cfg.representation));

  BackendModel float_backend;
  if (want_score_kl) {
    BackendConfig bc{cfg.lda_dim, cfg.plda_dim, cfg.em_iters};
    float_backend = TrainBackend(dev, bc);
  }

  std::vector<detail::SweepCell> cells;
  for (long long n : cfg.sweep_speakers)
    for (long long k : cfg.sweep_samples)
      cells.push_back({n, k,
                       MixSeed(cfg.seed, 0xce11000 + cells.size())});

  std::vector<detail::CellOutcome> outcomes(cells.size());
  ParallelFor(cells.size(), [&](std::size_t ci) {
    detail::CellOutcome &out = outcomes[ci];
    try {
      SpeakerDataset cell_ds = detail::ResolveCell(measure, cells[ci]);
      if (want_mi) {
        for (int b : cfg.bits) {
          QuantizedDataset qds = QuantizeDataset(banks.at(b), cell_ds);
          out.mi[b] = MutualInformation(qds);
          out.mi_ok[b] = true;
        }
      }
      if (want_daugman) {
        QuantizedDataset binary = QuantizeDataset(banks.at(1), cell_ds);
        out.dof = HammingDof(binary, cfg.daugman_pairing).dof;
        out.dof_ok = true;
      }
      if (want_adler) {
        try {
          out.adler_bits =
              AdlerInformation(cell_ds, cfg.adler_lambda, cfg.adler_ridge).bits;
          out.adler_ok = true;
        } catch (const InsufficientDataError &) {
          out.adler_ok = false;
        }
      }
      if (want_score_kl) {
        ScoreSet scores =
            BuildTrials(cell_ds, float_backend, nullptr, cfg.trial_seed);
        out.score_kl = ScoreSpaceKlBits(scores.genuine, scores.impostor,
                                        cfg.score_kl_bins);
        out.score_kl_ok = true;
      }
    } catch (const InsufficientDataError &) {
      // Unsatisfiable cell: all its entries render as missing.
    } catch (const std::exception &e) {
      out.fatal_error = e.what();
    }
  });

  std::vector<std::string> columns;
  for (const auto &cell : cells) columns.push_back(cell.Label());

  auto make_cell = [&](std::size_t ci, int bits,
                       std::optional<double> value) {
    ReportCell cell;
    cell.value = value;
    cell.bits = bits;
    cell.n_speakers = cells[ci].n_speakers;
    cell.k_samples = cells[ci].k_samples;
    cell.seed = cells[ci].seed;
    return cell;
  };

  nlohmann::json estimates = nlohmann::json::array();
  if (want_mi) {
    ReportTable table;
    table.caption = "Mutual information between speaker and quantized vector";
    table.units = "bits";
    table.row_header = "bits";
    table.columns = columns;
    for (int b : cfg.bits) {
      ReportRow row;
      row.label = std::to_string(b);
      for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const auto &out = outcomes[ci];
        const bool ok = out.mi_ok.count(b) && out.mi_ok.at(b);
        row.cells.push_back(make_cell(
            ci, b, ok ? std::optional<double>(out.mi.at(b).i_bits)
                      : std::nullopt));
        if (ok) {
          nlohmann::json e = EstimateToJson(out.mi.at(b));
          e["cell"] = cells[ci].Label();
          e["cell_seed"] = cells[ci].seed;
          estimates.push_back(std::move(e));
        }
      }
      table.rows.push_back(std::move(row));
    }
    result.tables.push_back(std::move(table));
  }
  if (want_daugman) {
    ReportTable table;
    table.caption = Strf("Hamming degrees of freedom (%s pairs, 1-bit codes)",
                         PairingName(cfg.daugman_pairing).c_str());
    table.units = "degrees of freedom";
    table.row_header = "measure";
    table.columns = columns;
    ReportRow row;
    row.label = "daugman_dof";
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
      row.cells.push_back(make_cell(
          ci, 1, outcomes[ci].dof_ok ? std::optional<double>(outcomes[ci].dof)
                                     : std::nullopt));
    table.rows.push_back(std::move(row));
    result.tables.push_back(std::move(table));
  }
  if (want_adler) {
    ReportTable table;
    table.caption =
        cfg.adler_ridge < 0.0
            ? Strf("Average per-speaker relative entropy (lambda=%g, "
                   "ridge=auto)", cfg.adler_lambda)
            : Strf("Average per-speaker relative entropy (lambda=%g, "
                   "ridge=%g)", cfg.adler_lambda, cfg.adler_ridge);
    table.units = "bits";
    table.row_header = "measure";
    table.columns = columns;
    ReportRow row;
    row.label = "adler_bits";
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
      row.cells.push_back(make_cell(
          ci, 0, outcomes[ci].adler_ok
                     ? std::optional<double>(outcomes[ci].adler_bits)
                     : std::nullopt));
    table.rows.push_back(std::move(row));
    result.tables.push_back(std::move(table));
  }
  if (want_score_kl) {
    ReportTable table;
    table.caption = Strf("KL divergence of genuine vs impostor scores (%d bins)",
                         cfg.score_kl_bins);
    table.units = "bits";
    table.row_header = "measure";
    table.columns = columns;
    ReportRow row;
    row.label = "score_kl_bits";
    for (std::size_t ci = 0; ci < cells.size(); ++ci)
      row.cells.push_back(make_cell(
          ci, 0, outcomes[ci].score_kl_ok
                     ? std::optional<double>(outcomes[ci].score_kl)
                     : std::nullopt));
    table.rows.push_back(std::move(row));
    result.tables.push_back(std::move(table));
  }

  std::string eer_fatal;
  if (cfg.eer_enabled) {
    SpeakerDataset verification = detail::SelectEligibleSpeakers(
        measure, cfg.eer_subset_speakers, cfg.seed);
    std::vector<std::pair<std::string, int>> settings;  // (label, bits; 0=float)
    if (cfg.eer_include_float) settings.emplace_back("float", 0);
    for (int b : cfg.bits) settings.emplace_back(std::to_string(b), b);

    std::vector<double> eers(settings.size());
    std::vector<std::string> eer_errors(settings.size());
    ParallelFor(settings.size(), [&](std::size_t si) {
      try {
        const int b = settings[si].second;
        BackendConfig bc{cfg.lda_dim, cfg.plda_dim, cfg.em_iters};
        const QuantizerBank *bank = b > 0 ? &banks.at(b) : nullptr;
        SpeakerDataset dev_b = b > 0 ? DiscretizeDataset(*bank, dev) : dev;
        BackendModel model = TrainBackend(dev_b, bc);
        ScoreSet scores =
            BuildTrials(verification, model, bank, cfg.trial_seed);
        eers[si] = 100.0 * ComputeEer(scores);
      } catch (const std::exception &e) {
        eer_errors[si] = e.what();
      }
    });
    for (std::size_t si = 0; si < settings.size() && eer_fatal.empty(); ++si)
      if (!eer_errors[si].empty())
        eer_fatal = Strf("eer setting '%s': %s", settings[si].first.c_str(),
                         eer_errors[si].c_str());

    if (eer_fatal.empty()) {
      ReportTable table;
      table.caption = "Verification EER by quantizer depth (backend refit per "
                      "setting)";
      table.units = "percent";
      table.row_header = "measure";
      ReportRow row;
      row.label = "eer_percent";
      for (std::size_t si = 0; si < settings.size(); ++si) {
        table.columns.push_back(settings[si].first);
        ReportCell cell;
        cell.value = eers[si];
        cell.bits = settings[si].second;
        cell.n_speakers = static_cast<long long>(verification.NumSpeakers());
        cell.k_samples = 0;
        cell.seed = cfg.trial_seed;
        row.cells.push_back(cell);
      }
      table.rows.push_back(std::move(row));
      result.tables.push_back(std::move(table));
    }
  }

  // Cross-measure comparison rows (measure, dataset, bits_config, value).
  if (cfg.measures.size() >= 2) {
    const std::string dataset_name =
        cfg.synthetic ? Strf("synthetic(seed=%llu)",
                             static_cast<unsigned long long>(cfg.synthetic->seed))
                      : cfg.input_path;
    nlohmann::json comparison = nlohmann::json::array();
    std::string csv = "measure,dataset,bits_config,value_bits\n";
    auto add_row = [&](const std::string &measure, const std::string &cell_label,
                       const std::string &bits_config, double value) {
      comparison.push_back(nlohmann::json{
          {"measure", measure},
          {"dataset", dataset_name + " [" + cell_label + "]"},
          {"bits_config", bits_config},
          {"value_bits", value}});
      csv += Strf("%s,%s [%s],%s,%.2f\n", measure.c_str(),
                  dataset_name.c_str(), cell_label.c_str(),
                  bits_config.c_str(), value);
    };
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
      const auto &out = outcomes[ci];
      const std::string label = cells[ci].Label();
      if (want_mi)
        for (int b : cfg.bits)
          if (out.mi_ok.count(b) && out.mi_ok.at(b))
            add_row("mutual_info", label, std::to_string(b),
                    out.mi.at(b).i_bits);
      if (want_daugman && out.dof_ok) add_row("daugman", label, "1", out.dof);
      if (want_adler && out.adler_ok)
        add_row("adler", label, "float", out.adler_bits);
      if (want_score_kl && out.score_kl_ok)
        add_row("score_kl", label, "float", out.score_kl);
    }
    detail::WriteTextFile(out_path("comparison.json"),
                          comparison.dump(2) + "\n", &result.written_files);
    detail::WriteTextFile(out_path("comparison.csv"), csv,
                          &result.written_files);
  }

  // Any fatal error: flush what exists plus a failure manifest, then surface
  // the error (with its sweep-cell coordinates when it came from a cell).
  std::string fatal;
  for (std::size_t ci = 0; ci < cells.size() && fatal.empty(); ++ci)
    if (!outcomes[ci].fatal_error.empty())
      fatal = Strf("sweep cell (%s): %s", cells[ci].Label().c_str(),
                   outcomes[ci].fatal_error.c_str());
  if (fatal.empty()) fatal = eer_fatal;

  const std::vector<std::string> table_names = [&]() {
    std::vector<std::string> names;
    if (want_mi) names.push_back("mutual_info");
    if (want_daugman) names.push_back("daugman");
    if (want_adler) names.push_back("adler");
    if (want_score_kl) names.push_back("score_kl");
    if (cfg.eer_enabled && eer_fatal.empty()) names.push_back("eer");
    return names;
  }();
  for (std::size_t t = 0; t < result.tables.size(); ++t) {
    const std::string &name = table_names[t];
    detail::WriteTextFile(out_path(name + ".json"),
                          TableToJson(result.tables[t]).dump(2) + "\n",
                          &result.written_files);
    detail::WriteTextFile(out_path(name + ".csv"), RenderCsv(result.tables[t]),
                          &result.written_files);
    detail::WriteTextFile(out_path(name + ".md"),
                          RenderMarkdown(result.tables[t]),
                          &result.written_files);
  }
  if (want_mi)
    detail::WriteTextFile(out_path("estimates.json"), estimates.dump(2) + "\n",
                          &result.written_files);

  nlohmann::json manifest;
  manifest["status"] = fatal.empty() ? "ok" : "failed";
  manifest["tables"] = table_names;
  if (!fatal.empty()) manifest["error"] = fatal;
  detail::WriteTextFile(out_path(fatal.empty() ? "run_manifest.json"
                                               : "failure_manifest.json"),
                        manifest.dump(2) + "\n", &result.written_files);
  if (!fatal.empty()) throw Error(fatal);
  return result;
}

}  // namespace vuniq

#endif  // VUNIQ_EXPERIMENT_HPP_
