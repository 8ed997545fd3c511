// tools/vuniq_main.cpp

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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vuniq/vuniq.hpp"

namespace {

using namespace vuniq;

std::optional<FileFormat> ParseFormat(const std::string &name) {
  if (name.empty()) return std::nullopt;
  if (name == "csv") return FileFormat::kCsv;
  if (name == "binary") return FileFormat::kBinary;
  throw ConfigError(Strf("unknown format '%s' (expected csv|binary)",
                         name.c_str()));
}

void PrintJson(const nlohmann::json &j, const std::string &out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream os(out_path);
    if (!os) throw IoError(Strf("cannot write %s", out_path.c_str()));
    os << j.dump(2) << "\n";
  }
}

int Run(int argc, char **argv) {
  CLI::App app{"uniqueness estimation for fixed-dimension speaker embeddings"};
  app.require_subcommand(1);

  // ingest: validate a dataset and convert between formats.
  std::string in_path, out_path, in_format, out_format;
  auto *ingest = app.add_subcommand("ingest", "validate and convert a dataset");
  ingest->add_option("--in", in_path, "input dataset")->required();
  ingest->add_option("--in-format", in_format, "csv|binary (default: by extension)");
  ingest->add_option("--out", out_path, "output dataset")->required();
  ingest->add_option("--out-format", out_format, "csv|binary (default: by extension)");

  // split
  double dev_fraction = 0.5;
  uint64_t seed = 42;
  std::string dev_out, measure_out;
  auto *split = app.add_subcommand("split", "split speakers into dev/measure");
  split->add_option("--in", in_path, "input dataset")->required();
  split->add_option("--format", in_format, "csv|binary (default: by extension)");
  split->add_option("--dev-fraction", dev_fraction, "fraction of speakers for dev");
  split->add_option("--seed", seed, "shuffle seed");
  split->add_option("--dev-out", dev_out, "dev output path")->required();
  split->add_option("--measure-out", measure_out, "measurement output path")->required();

  // quantize-train
  int bits = 3;
  double tol = 1e-7;
  int max_iter = 200;
  std::string representation = "quantum_value", bank_path;
  auto *qtrain = app.add_subcommand("quantize-train",
                                    "train per-dimension Lloyd-Max quantizers");
  qtrain->add_option("--in", in_path, "training (dev) dataset")->required();
  qtrain->add_option("--format", in_format, "csv|binary");
  qtrain->add_option("--bits", bits, "bits per element (1..8)");
  qtrain->add_option("--tol", tol, "relative MSE convergence tolerance");
  qtrain->add_option("--max-iter", max_iter, "iteration cap");
  qtrain->add_option("--representation", representation, "quantum_value|codeword");
  qtrain->add_option("--out", bank_path, "bank JSON output")->required();

  // quantize-apply
  auto *qapply = app.add_subcommand(
      "quantize-apply", "discretize a dataset through a trained bank");
  qapply->add_option("--in", in_path, "input dataset")->required();
  qapply->add_option("--format", in_format, "csv|binary");
  qapply->add_option("--bank", bank_path, "bank JSON")->required();
  qapply->add_option("--out", out_path, "output dataset")->required();
  qapply->add_option("--out-format", out_format, "csv|binary");

  // measure
  std::vector<std::string> measures;
  std::string pairing = "between_speaker", scores_path;
  double adler_lambda = 0.5, adler_ridge = -1.0;
  int kl_bins = 64;
  auto *measure_cmd =
      app.add_subcommand("measure", "uniqueness measures on a dataset");
  measure_cmd->add_option("--in", in_path, "measurement dataset")->required();
  measure_cmd->add_option("--format", in_format, "csv|binary");
  measure_cmd
      ->add_option("--measures", measures,
                   "mutual_info, daugman, adler, score_kl")
      ->required()
      ->delimiter(',');
  measure_cmd->add_option("--bank", bank_path,
                          "quantizer bank (mutual_info, daugman)");
  measure_cmd->add_option("--pairing", pairing, "between_speaker|all_pairs");
  measure_cmd->add_option("--lambda", adler_lambda, "covariance shrinkage");
  measure_cmd->add_option("--ridge", adler_ridge, "ridge (negative: automatic)");
  measure_cmd->add_option("--scores", scores_path,
                          "score CSV for score_kl (from 'eer --scores-out')");
  measure_cmd->add_option("--bins", kl_bins, "histogram bins for score_kl");
  measure_cmd->add_option("--out", out_path, "JSON output (default: stdout)");

  // backend-train
  int lda_dim = 0, plda_dim = -1, em_iters = 10;
  std::string model_path;
  auto *btrain = app.add_subcommand("backend-train",
                                    "fit whitening, LDA and GPLDA on dev data");
  btrain->add_option("--dev", in_path, "dev dataset")->required();
  btrain->add_option("--format", in_format, "csv|binary");
  btrain->add_option("--bank", bank_path, "discretize dev through this bank first");
  btrain->add_option("--lda-dim", lda_dim, "LDA target dimension (0: none)");
  btrain->add_option("--plda-dim", plda_dim, "speaker subspace dim (-1: d/2)");
  btrain->add_option("--em-iters", em_iters, "EM iterations");
  btrain->add_option("--out", model_path, "model output path")->required();

  // eer
  long long subset = 0;
  std::string scores_out;
  uint64_t trial_seed = 1;
  auto *eer_cmd = app.add_subcommand("eer", "verification EER on a dataset");
  eer_cmd->add_option("--in", in_path, "measurement dataset")->required();
  eer_cmd->add_option("--format", in_format, "csv|binary");
  eer_cmd->add_option("--model", model_path, "backend model")->required();
  eer_cmd->add_option("--bank", bank_path, "discretize trials through this bank");
  eer_cmd->add_option("--subset", subset, "verification speakers (0: all)");
  eer_cmd->add_option("--seed", seed, "subset selection seed");
  eer_cmd->add_option("--trial-seed", trial_seed, "holdout shuffle seed");
  eer_cmd->add_option("--scores-out", scores_out, "write label,score CSV here");

  // synth
  int dim = 50;
  double between_std = 1.0, within_std = 0.5;
  long long n_speakers = 1000, k_samples = 100;
  auto *synth = app.add_subcommand("synth", "generate a Gaussian population");
  synth->add_option("--dim", dim, "vector dimension");
  synth->add_option("--between-std", between_std, "speaker-mean std per dim");
  synth->add_option("--within-std", within_std, "within-speaker std per dim");
  synth->add_option("--speakers", n_speakers, "number of speakers");
  synth->add_option("--samples", k_samples, "samples per speaker");
  synth->add_option("--seed", seed, "generator seed");
  synth->add_option("--out", out_path, "output dataset")->required();
  synth->add_option("--out-format", out_format, "csv|binary");

  // run: flags mirror the experiment config; --config overrides all of them.
  std::string config_path, out_dir_override, run_input, run_measures_flat;
  std::vector<int> run_bits;
  std::vector<long long> run_sweep_n, run_sweep_k;
  std::vector<std::string> run_measures;
  double run_dev_fraction = 0.5, run_between = 1.0, run_within = 0.5;
  uint64_t run_seed = 42;
  int run_dim = 50, run_lda = 0, run_plda = -1, run_em = 10;
  long long run_speakers = 1000, run_samples = 100, run_eer_subset = 0;
  bool run_eer = false;
  std::string run_out_dir;
  auto *run_cmd = app.add_subcommand("run", "run a configured experiment");
  run_cmd->add_option("--config", config_path,
                      "experiment config JSON (overrides every other flag)");
  run_cmd->add_option("--out-dir", out_dir_override,
                      "redirect artifacts (kept out of the config echo)");
  run_cmd->add_option("--input", run_input, "dataset path (csv|binary)");
  run_cmd->add_option("--dim", run_dim, "synthetic: dimension");
  run_cmd->add_option("--between-std", run_between, "synthetic: speaker-mean std");
  run_cmd->add_option("--within-std", run_within, "synthetic: within-speaker std");
  run_cmd->add_option("--speakers", run_speakers, "synthetic: speaker count");
  run_cmd->add_option("--samples", run_samples, "synthetic: samples per speaker");
  run_cmd->add_option("--dev-fraction", run_dev_fraction, "dev split fraction");
  run_cmd->add_option("--seed", run_seed, "master seed");
  run_cmd->add_option("--bits", run_bits, "quantizer depths")->delimiter(',');
  run_cmd->add_option("--n-speakers", run_sweep_n, "sweep: speaker counts (0: all)")
      ->delimiter(',');
  run_cmd->add_option("--k-samples", run_sweep_k, "sweep: samples per speaker (0: all)")
      ->delimiter(',');
  run_cmd->add_option("--measures", run_measures,
                      "mutual_info, daugman, adler, score_kl")
      ->delimiter(',');
  run_cmd->add_option("--lda-dim", run_lda, "backend LDA dimension (0: none)");
  run_cmd->add_option("--plda-dim", run_plda, "backend speaker subspace (-1: d/2)");
  run_cmd->add_option("--em-iters", run_em, "backend EM iterations");
  run_cmd->add_flag("--eer", run_eer, "add the per-depth EER comparison");
  run_cmd->add_option("--eer-subset", run_eer_subset,
                      "verification speakers (0: all)");
  run_cmd->add_option("--output-dir", run_out_dir, "artifact directory");

  // render
  std::string render_format = "markdown";
  auto *render = app.add_subcommand("render", "render a report table");
  render->add_option("--in", in_path, "table JSON")->required();
  render->add_option("--format", render_format, "csv|markdown|json");
  render->add_option("--out", out_path, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error; --help is not
  }

  if (*ingest) {
    SpeakerDataset ds = LoadDataset(in_path, ParseFormat(in_format));
    SaveDataset(ds, out_path, ParseFormat(out_format));
    std::cout << "ingested " << ds.NumVectors() << " vectors from "
              << ds.NumSpeakers() << " speakers (dim " << ds.Dim() << ")\n";
  } else if (*split) {
    SpeakerDataset ds = LoadDataset(in_path, ParseFormat(in_format));
    auto [dev, meas] = SplitBySpeaker(ds, dev_fraction, seed);
    SaveDataset(dev, dev_out);
    SaveDataset(meas, measure_out);
    std::cout << "dev: " << dev.NumSpeakers() << " speakers, measure: "
              << meas.NumSpeakers() << " speakers\n";
  } else if (*qtrain) {
    SpeakerDataset ds = LoadDataset(in_path, ParseFormat(in_format));
    QuantizerBank bank = TrainQuantizerBank(
        ds, bits, tol, max_iter, RepresentationFromName(representation));
    SaveBank(bank, bank_path);
    double mean_distortion = 0.0;
    for (const auto &q : bank.per_dim) mean_distortion += q.distortion;
    mean_distortion /= bank.Dim();
    std::cout << "trained " << bank.Dim() << " quantizers at " << bits
              << " bits, mean MSE " << mean_distortion << "\n";
  } else if (*qapply) {
    SpeakerDataset ds = LoadDataset(in_path, ParseFormat(in_format));
    QuantizerBank bank = LoadBank(bank_path);
    SaveDataset(DiscretizeDataset(bank, ds), out_path, ParseFormat(out_format));
  } else if (*measure_cmd) {
    SpeakerDataset ds = LoadDataset(in_path, ParseFormat(in_format));
    nlohmann::json out = nlohmann::json::object();
    for (const auto &m : measures) {
      if (m == "mutual_info") {
        if (bank_path.empty())
          throw ConfigError("mutual_info needs --bank");
        QuantizerBank bank = LoadBank(bank_path);
        out["mutual_info"] =
            EstimateToJson(MutualInformation(QuantizeDataset(bank, ds)));
      } else if (m == "daugman") {
        if (bank_path.empty()) throw ConfigError("daugman needs --bank");
        QuantizerBank bank = LoadBank(bank_path);
        if (bank.Bits() != 1)
          throw ConfigError("daugman needs a 1-bit bank");
        DofEstimate dof = HammingDof(QuantizeDataset(bank, ds),
                                     PairingFromName(pairing));
        out["daugman"] = {{"p_hat", dof.p_hat},
                          {"sigma2_hat", dof.sigma2_hat},
                          {"dof", dof.dof},
                          {"pairing", pairing}};
      } else if (m == "adler") {
        AdlerResult a = AdlerInformation(ds, adler_lambda, adler_ridge);
        out["adler"] = {{"bits", a.bits},
                        {"lambda", a.lambda},
                        {"ridge", a.ridge},
                        {"n_speakers", a.n_speakers}};
      } else if (m == "score_kl") {
        if (scores_path.empty())
          throw ConfigError("score_kl needs --scores (see 'eer --scores-out')");
        ScoreSet scores = LoadScoreSetCsv(scores_path);
        out["score_kl"] = {
            {"bits", ScoreSpaceKlBits(scores.genuine, scores.impostor, kl_bins)},
            {"n_bins", kl_bins}};
      } else {
        throw ConfigError(Strf("unknown measure '%s'", m.c_str()));
      }
    }
    PrintJson(out, out_path);
  } else if (*btrain) {
    SpeakerDataset dev = LoadDataset(in_path, ParseFormat(in_format));
    if (!bank_path.empty()) dev = DiscretizeDataset(LoadBank(bank_path), dev);
    BackendConfig bc{lda_dim, plda_dim, em_iters};
    BackendModel model = TrainBackend(dev, bc);
    SaveBackend(model, model_path);
    std::cout << "backend trained: input dim " << model.InputDim()
              << ", projected dim " << model.ProjectedDim()
              << ", final log-likelihood "
              << (model.plda.loglik_trace.empty()
                      ? 0.0
                      : model.plda.loglik_trace.back())
              << "\n";
  } else if (*eer_cmd) {
    SpeakerDataset ds = LoadDataset(in_path, ParseFormat(in_format));
    BackendModel model = LoadBackend(model_path);
    std::optional<QuantizerBank> bank;
    if (!bank_path.empty()) bank = LoadBank(bank_path);
    if (subset > 0) {
      SpeakerDataset sub(ds.Dim());
      std::vector<std::string> eligible;
      for (const auto &[id, vecs] : ds.Speakers())
        if (vecs.size() >= 2) eligible.push_back(id);
      if (static_cast<long long>(eligible.size()) < subset)
        throw InsufficientDataError(
            Strf("requested %lld speakers, only %zu have 2+ samples", subset,
                 eligible.size()));
      SplitMix64 rng(MixSeed(seed, 0xEE5));
      SeededShuffle(eligible, rng);
      eligible.resize(subset);
      for (const auto &id : eligible)
        for (const auto &v : ds.VectorsOf(id)) sub.Add(id, v);
      ds = std::move(sub);
    }
    ScoreSet scores =
        BuildTrials(ds, model, bank ? &*bank : nullptr, trial_seed);
    if (!scores_out.empty()) SaveScoreSetCsv(scores, scores_out);
    std::cout << "eer " << 100.0 * ComputeEer(scores) << "% ("
              << scores.genuine.size() << " genuine, "
              << scores.impostor.size() << " impostor)\n";
  } else if (*synth) {
    PopulationSpec spec(dim, between_std, within_std, n_speakers, k_samples,
                        seed);
    SaveDataset(GeneratePopulation(spec), out_path, ParseFormat(out_format));
  } else if (*run_cmd) {
    ExperimentConfig cfg;
    if (!config_path.empty()) {
      cfg = LoadConfig(config_path);
    } else {
      if (!run_input.empty())
        cfg.input_path = run_input;
      else
        cfg.synthetic = PopulationSpec(run_dim, run_between, run_within,
                                       run_speakers, run_samples, run_seed);
      cfg.dev_fraction = run_dev_fraction;
      cfg.seed = run_seed;
      cfg.bits = run_bits;
      if (!run_sweep_n.empty()) cfg.sweep_speakers = run_sweep_n;
      if (!run_sweep_k.empty()) cfg.sweep_samples = run_sweep_k;
      cfg.measures = run_measures;
      cfg.lda_dim = run_lda;
      cfg.plda_dim = run_plda;
      cfg.em_iters = run_em;
      cfg.eer_enabled = run_eer;
      cfg.eer_subset_speakers = run_eer_subset;
      cfg.output_dir = run_out_dir;
      cfg.Validate();
    }
    ExperimentResult result = RunExperiment(cfg, out_dir_override);
    for (const auto &f : result.written_files) std::cout << f << "\n";
  } else if (*render) {
    std::ifstream is(in_path);
    if (!is) throw IoError(Strf("cannot open %s", in_path.c_str()));
    nlohmann::json j;
    try {
      is >> j;
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(Strf("bad table %s: %s", in_path.c_str(), e.what()));
    }
    const std::string text =
        Render(TableFromJson(j), RenderFormatFromName(render_format));
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream os(out_path, std::ios::binary);
      if (!os) throw IoError(Strf("cannot write %s", out_path.c_str()));
      os << text;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char **argv) {
  try {
    return Run(argc, argv);
  } catch (const vuniq::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vuniq::NumericalError &e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const vuniq::Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
