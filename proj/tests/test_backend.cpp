// tests/test_backend.cpp

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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <vector>

#include "vuniq/backend.hpp"
#include "vuniq/rng.hpp"
#include "vuniq/synth.hpp"

using namespace vuniq;

namespace {

GaussianModel FitAll(const SpeakerDataset &ds) {
  std::vector<const Vector *> all;
  for (const auto &[id, vecs] : ds.Speakers())
    for (const auto &v : vecs) all.push_back(&v);
  return FitGaussian(all);
}

}  // namespace

TEST_CASE("whitening: 1-D variance 4 gives whitener 0.5") {
  SpeakerDataset ds(1);
  Vector a(1), b(1);
  a[0] = 0.0;
  b[0] = 4.0;
  ds.Add("s0", a);
  ds.Add("s1", b);
  PreprocessTransform t = FitPreprocess(ds);
  REQUIRE_THAT(t.center[0], Catch::Matchers::WithinAbs(2.0, 1e-12));
  REQUIRE_THAT(t.whitener(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("whitening the dev set gives identity covariance") {
  PopulationSpec spec(6, 1.0, 0.5, 40, 20, 3);
  SpeakerDataset dev = GeneratePopulation(spec);
  PreprocessTransform t = FitPreprocess(dev);

  SpeakerDataset whitened(6);
  for (const auto &[id, vecs] : dev.Speakers())
    for (const auto &v : vecs)
      whitened.Add(id, Vector(t.whitener * (v - t.center)));
  GaussianModel g = FitAll(whitened);
  REQUIRE((g.covariance - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("near-identity dev covariance gives near-identity whitener") {
  PopulationSpec spec(4, 0.8, 0.6, 200, 50, 5);
  SpeakerDataset dev = GeneratePopulation(spec);
  // marginal variance 0.64 + 0.36 = 1 per dim, independent dims
  PreprocessTransform t = FitPreprocess(dev);
  REQUIRE((t.whitener - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.1);
}

TEST_CASE("preprocess normalizes to unit length and rejects the center") {
  PopulationSpec spec(5, 1.0, 0.5, 10, 10, 7);
  SpeakerDataset dev = GeneratePopulation(spec);
  PreprocessTransform t = FitPreprocess(dev);
  for (const auto &[id, vecs] : dev.Speakers())
    for (const auto &v : vecs)
      REQUIRE_THAT(CenterWhitenNormalize(t, v).norm(),
                   Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THROWS_AS(CenterWhitenNormalize(t, t.center), ValidationError);
}

TEST_CASE("two separated clusters give the analytic LDA direction") {
  SplitMix64 rng(11);
  SpeakerDataset ds(2);
  const Vector mu_a = (Vector(2) << 3.0, 1.0).finished();
  const Vector mu_b = (Vector(2) << -3.0, -1.0).finished();
  for (int i = 0; i < 300; ++i) {
    Vector noise(2);
    noise << 0.5 * rng.NextNormal(), 1.5 * rng.NextNormal();
    ds.Add("a", Vector(mu_a + noise));
    noise << 0.5 * rng.NextNormal(), 1.5 * rng.NextNormal();
    ds.Add("b", Vector(mu_b + noise));
  }
  Matrix lda = FitLda(ds, 1);

  // oracle: direction S_w^-1 (mu_a - mu_b) from the empirical scatter
  Matrix s_w = Matrix::Zero(2, 2);
  Vector mean_a = Vector::Zero(2), mean_b = Vector::Zero(2);
  for (const auto &v : ds.VectorsOf("a")) mean_a += v;
  for (const auto &v : ds.VectorsOf("b")) mean_b += v;
  mean_a /= 300.0;
  mean_b /= 300.0;
  for (const auto &v : ds.VectorsOf("a")) {
    Vector d = v - mean_a;
    s_w += d * d.transpose();
  }
  for (const auto &v : ds.VectorsOf("b")) {
    Vector d = v - mean_b;
    s_w += d * d.transpose();
  }
  Vector oracle = s_w.ldlt().solve(mean_a - mean_b).normalized();
  const double cosine = std::fabs(oracle.dot(lda.col(0).normalized()));
  REQUIRE(cosine > std::cos(1.0 * M_PI / 180.0));
}

TEST_CASE("LDA dimension bounds") {
  PopulationSpec spec(4, 1.0, 0.5, 5, 6, 13);
  SpeakerDataset ds = GeneratePopulation(spec);
  REQUIRE_NOTHROW(FitLda(ds, 4));  // d == n_speakers - 1 == dim
  REQUIRE_THROWS_AS(FitLda(ds, 5), ValidationError);
  REQUIRE_THROWS_AS(FitLda(ds, 0), ValidationError);
}

TEST_CASE("spherical within-class scatter reduces LDA to PCA of means") {
  SplitMix64 rng(17);
  const int m = 4;
  SpeakerDataset ds(m);
  for (int s = 0; s < 12; ++s) {
    Vector mu(m);
    for (int j = 0; j < m; ++j) mu[j] = rng.NextNormal();
    // +-delta on every axis: within scatter is exactly spherical
    for (int j = 0; j < m; ++j) {
      Vector e = Vector::Zero(m);
      e[j] = 0.3;
      ds.Add(Strf("s%02d", s), Vector(mu + e));
      ds.Add(Strf("s%02d", s), Vector(mu - e));
    }
  }
  Matrix lda = FitLda(ds, 2);

  // oracle: plain eigenvectors of the between-class scatter
  Vector global = Vector::Zero(m);
  std::size_t total = 0;
  for (const auto &[id, vecs] : ds.Speakers())
    for (const auto &v : vecs) { global += v; ++total; }
  global /= static_cast<double>(total);
  Matrix s_b = Matrix::Zero(m, m);
  for (const auto &[id, vecs] : ds.Speakers()) {
    Vector mean = Vector::Zero(m);
    for (const auto &v : vecs) mean += v;
    mean /= static_cast<double>(vecs.size());
    Vector d = mean - global;
    s_b += static_cast<double>(vecs.size()) * d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(s_b);
  for (int c = 0; c < 2; ++c) {
    Vector pca = es.eigenvectors().col(m - 1 - c);
    const double cosine = std::fabs(pca.normalized().dot(lda.col(c).normalized()));
    REQUIRE(cosine > 0.9999);
  }
}

TEST_CASE("GPLDA log-likelihood is monotone and W stays PD") {
  SplitMix64 rng(19);
  Matrix f(6, 3);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 3; ++c) f(r, c) = 0.5 * rng.NextNormal();
  Matrix w = 0.4 * Matrix::Identity(6, 6);
  SpeakerDataset ds = GeneratePldaPopulation(f, w, 150, 8, 21);
  PldaModel model = FitGplda(ds, 3, 12);
  REQUIRE(model.loglik_trace.size() == 13);
  for (std::size_t i = 1; i < model.loglik_trace.size(); ++i) {
    const double prev = model.loglik_trace[i - 1];
    REQUIRE(model.loglik_trace[i] >= prev - 1e-6 * std::fabs(prev));
  }
  Eigen::LLT<Matrix> llt(model.within_cov);
  REQUIRE(llt.info() == Eigen::Success);
}

TEST_CASE("GPLDA recovers the generating between covariance roughly") {
  SplitMix64 rng(23);
  Matrix f = Matrix::Zero(8, 4);
  for (int c = 0; c < 4; ++c) f(c, c) = 2.0 - 0.3 * c;
  Matrix w = 0.3 * Matrix::Identity(8, 8);
  SpeakerDataset ds = GeneratePldaPopulation(f, w, 400, 12, 29);
  PldaModel model = FitGplda(ds, 4, 15);
  const Matrix b_true = f * f.transpose();
  const double rel =
      (model.BetweenCov() - b_true).norm() / b_true.norm();
  REQUIRE(rel < 0.2);
}

TEST_CASE("GPLDA excludes single-sample speakers with a warning") {
  SplitMix64 rng(31);
  Matrix f = Matrix::Identity(3, 2);
  Matrix w = 0.5 * Matrix::Identity(3, 3);
  SpeakerDataset ds = GeneratePldaPopulation(f, w, 30, 5, 33);
  Vector lone(3);
  lone << 1, 2, 3;
  ds.Add("zzz_lone", lone);
  std::vector<std::string> excluded;
  PldaModel model = FitGplda(ds, 2, 4, &excluded);
  REQUIRE(excluded == std::vector<std::string>{"zzz_lone"});

  SpeakerDataset all_single(2);
  Vector v(2);
  v << 1, 2;
  all_single.Add("a", v);
  all_single.Add("b", v);
  REQUIRE_THROWS_AS(FitGplda(all_single, 1, 3), InsufficientDataError);
}

TEST_CASE("PLDA scoring: no speaker variability means zero scores") {
  PldaModel model;
  model.f = Matrix::Zero(3, 2);
  model.within_cov = Matrix::Identity(3, 3) * 0.7;
  SplitMix64 rng(37);
  PldaScorer scorer(model);
  for (int i = 0; i < 20; ++i) {
    Vector x(3), y(3);
    for (int j = 0; j < 3; ++j) {
      x[j] = rng.NextNormal();
      y[j] = rng.NextNormal();
    }
    REQUIRE_THAT(scorer.Score(x, y), Catch::Matchers::WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("PLDA score is exactly symmetric") {
  SplitMix64 rng(41);
  PldaModel model;
  model.f = Matrix(4, 2);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 2; ++c) model.f(r, c) = rng.NextNormal();
  Matrix a(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) a(r, c) = rng.NextNormal();
  model.within_cov = a * a.transpose() + 0.5 * Matrix::Identity(4, 4);
  PldaScorer scorer(model);
  for (int i = 0; i < 50; ++i) {
    Vector x(4), y(4);
    for (int j = 0; j < 4; ++j) {
      x[j] = rng.NextNormal();
      y[j] = rng.NextNormal();
    }
    REQUIRE(scorer.Score(x, y) == scorer.Score(y, x));
  }
}

TEST_CASE("1-D PLDA scores match dense Gaussian evaluation") {
  PldaModel model;
  model.f = Matrix::Ones(1, 1);       // B = 1
  model.within_cov = Matrix::Ones(1, 1);  // W = 1
  PldaScorer scorer(model);

  auto dense_llr = [&](double x1, double x2) {
    // ln N([x1;x2]; 0, [[2,1],[1,2]]) - ln N([x1;x2]; 0, [[2,0],[0,2]])
    Eigen::Matrix2d same, diff;
    same << 2, 1, 1, 2;
    diff << 2, 0, 0, 2;
    Eigen::Vector2d z(x1, x2);
    const double qs = z.dot(same.inverse() * z);
    const double qd = z.dot(diff.inverse() * z);
    return -0.5 * (qs + std::log(same.determinant())) +
           0.5 * (qd + std::log(diff.determinant()));
  };
  SplitMix64 rng(43);
  for (int i = 0; i < 40; ++i) {
    const double x = 2.0 * rng.NextNormal();
    const double y = 2.0 * rng.NextNormal();
    Vector vx(1), vy(1);
    vx[0] = x;
    vy[0] = y;
    REQUIRE_THAT(scorer.Score(vx, vy),
                 Catch::Matchers::WithinAbs(dense_llr(x, y), 1e-10));
  }
  Vector one(1), minus(1);
  one[0] = 1.0;
  minus[0] = -1.0;
  REQUIRE(scorer.Score(one, one) > scorer.Score(one, minus));
}

TEST_CASE("trials: counting, determinism, separation") {
  PopulationSpec spec(8, 1.0, 0.05, 30, 6, 47);  // within-std << between-std
  SpeakerDataset pop = GeneratePopulation(spec);
  auto [dev, measure] = SplitBySpeaker(pop, 0.5, 47);
  BackendModel model = TrainBackend(dev, BackendConfig{0, 4, 8});

  ScoreSet scores = BuildTrials(measure, model, nullptr, 5);
  const std::size_t n = measure.NumSpeakers();
  REQUIRE(scores.genuine.size() == n);
  REQUIRE(scores.impostor.size() == n * (n - 1));

  ScoreSet again = BuildTrials(measure, model, nullptr, 5);
  REQUIRE(scores.genuine == again.genuine);
  REQUIRE(scores.impostor == again.impostor);

  double min_gen = 1e300, max_imp = -1e300;
  for (double s : scores.genuine) min_gen = std::min(min_gen, s);
  for (double s : scores.impostor) max_imp = std::max(max_imp, s);
  REQUIRE(min_gen > max_imp);
  REQUIRE_THAT(ComputeEer(scores), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("trials warn on single-sample speakers and need two usable ones") {
  PopulationSpec spec(4, 1.0, 0.3, 6, 4, 53);
  SpeakerDataset pop = GeneratePopulation(spec);
  auto [dev, measure] = SplitBySpeaker(pop, 0.5, 53);
  BackendModel model = TrainBackend(dev, BackendConfig{0, 2, 5});
  Vector lone = measure.Speakers().begin()->second.front();
  measure.Add("zzz_single", lone);
  ScoreSet scores = BuildTrials(measure, model, nullptr, 7);
  REQUIRE(scores.genuine.size() == 3);  // the single-sample speaker is skipped
}

TEST_CASE("EER closed cases") {
  ScoreSet perfect{{0.9, 0.8}, {0.1, 0.2}};
  REQUIRE_THAT(ComputeEer(perfect), Catch::Matchers::WithinAbs(0.0, 1e-15));

  ScoreSet crossed{{0.8, 0.4}, {0.6, 0.2}};
  REQUIRE_THAT(ComputeEer(crossed), Catch::Matchers::WithinAbs(0.5, 1e-15));

  ScoreSet chance{{0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}};
  REQUIRE_THAT(ComputeEer(chance), Catch::Matchers::WithinAbs(0.5, 1e-15));

  REQUIRE_THROWS_AS(ComputeEer(ScoreSet{{}, {0.1}}), EmptyInputError);
}

TEST_CASE("EER is invariant under strictly increasing transforms") {
  SplitMix64 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreSet scores;
    const auto ng = 1 + rng.NextBelow(30), ni = 1 + rng.NextBelow(30);
    for (uint64_t i = 0; i < ng; ++i)
      scores.genuine.push_back(rng.NextNormal() + 0.5);
    for (uint64_t i = 0; i < ni; ++i) scores.impostor.push_back(rng.NextNormal());
    const double base = ComputeEer(scores);

    ScoreSet mapped;
    for (double s : scores.genuine) mapped.genuine.push_back(std::exp(0.7 * s) + 3.0);
    for (double s : scores.impostor) mapped.impostor.push_back(std::exp(0.7 * s) + 3.0);
    REQUIRE_THAT(ComputeEer(mapped), Catch::Matchers::WithinAbs(base, 1e-12));
  }
}

TEST_CASE("scores and EER survive a model round-trip") {
  PopulationSpec spec(5, 1.0, 0.4, 20, 5, 61);
  SpeakerDataset pop = GeneratePopulation(spec);
  auto [dev, measure] = SplitBySpeaker(pop, 0.5, 61);
  BackendModel model = TrainBackend(dev, BackendConfig{3, 2, 6});

  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vuniq_backend_tests";
  fs::create_directories(dir);
  const std::string path = (dir / "model.biom").string();
  SaveBackend(model, path);
  BackendModel restored = LoadBackend(path);

  ScoreSet a = BuildTrials(measure, model, nullptr, 3);
  ScoreSet b = BuildTrials(measure, restored, nullptr, 3);
  REQUIRE(a.genuine == b.genuine);
  REQUIRE(a.impostor == b.impostor);
  REQUIRE(restored.em_iterations == model.em_iterations);
  REQUIRE(restored.plda.loglik_trace == model.plda.loglik_trace);
}

TEST_CASE("trials are invariant to speaker insertion order") {
  PopulationSpec spec(4, 1.0, 0.4, 10, 4, 67);
  SpeakerDataset pop = GeneratePopulation(spec);
  auto [dev, measure] = SplitBySpeaker(pop, 0.5, 67);
  BackendModel model = TrainBackend(dev, BackendConfig{0, 2, 5});

  SpeakerDataset reversed(measure.Dim());
  std::vector<std::string> ids = measure.SpeakerIds();
  for (auto it = ids.rbegin(); it != ids.rend(); ++it)
    for (const auto &v : measure.VectorsOf(*it)) reversed.Add(*it, v);
  ScoreSet a = BuildTrials(measure, model, nullptr, 9);
  ScoreSet b = BuildTrials(reversed, model, nullptr, 9);
  REQUIRE(a.genuine == b.genuine);
  REQUIRE(a.impostor == b.impostor);
}
