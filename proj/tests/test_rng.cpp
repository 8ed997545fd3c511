// tests/test_rng.cpp

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
#include <vector>

#include "vuniq/rng.hpp"

using namespace vuniq;

TEST_CASE("SplitMix64 streams are deterministic") {
  SplitMix64 a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.Next() == b.Next());
  SplitMix64 c(1235);
  REQUIRE(SplitMix64(1234).Next() != c.Next());
}

TEST_CASE("NextBelow stays in range and covers small ranges") {
  SplitMix64 rng(99);
  std::vector<int> seen(5, 0);
  for (int i = 0; i < 5000; ++i) {
    uint64_t v = rng.NextBelow(5);
    REQUIRE(v < 5);
    ++seen[v];
  }
  for (int count : seen) REQUIRE(count > 800);
  REQUIRE_THROWS_AS(rng.NextBelow(0), ValidationError);
}

TEST_CASE("InverseNormalCdf matches reference quantiles") {
  REQUIRE_THAT(InverseNormalCdf(0.5), Catch::Matchers::WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(InverseNormalCdf(0.975),
               Catch::Matchers::WithinAbs(1.959963984540054, 1e-12));
  REQUIRE_THAT(InverseNormalCdf(0.8413447460685429),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
  REQUIRE_THAT(InverseNormalCdf(0.0013498980316300933),
               Catch::Matchers::WithinAbs(-3.0, 1e-11));
  REQUIRE_THROWS_AS(InverseNormalCdf(0.0), ValidationError);
  REQUIRE_THROWS_AS(InverseNormalCdf(1.0), ValidationError);
}

TEST_CASE("InverseNormalCdf inverts the normal CDF") {
  for (double p = 0.0005; p < 1.0; p += 0.0007) {
    const double x = InverseNormalCdf(p);
    REQUIRE_THAT(NormalCdf(x), Catch::Matchers::WithinAbs(p, 1e-12));
  }
}

TEST_CASE("normal draws have the right moments") {
  SplitMix64 rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.NextNormal();
    sum += x;
    sum_sq += x * x;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  REQUIRE_THAT(mean, Catch::Matchers::WithinAbs(0.0, 0.01));
  REQUIRE_THAT(var, Catch::Matchers::WithinAbs(1.0, 0.02));
}

TEST_CASE("MixSeed separates streams") {
  REQUIRE(MixSeed(42, 0) != MixSeed(42, 1));
  REQUIRE(MixSeed(42, 0) == MixSeed(42, 0));
  REQUIRE(MixSeed(42, 0) != MixSeed(43, 0));
}

TEST_CASE("SeededShuffle is a seed-determined permutation") {
  std::vector<int> base{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<int> a = base, b = base;
  SplitMix64 ra(5), rb(5);
  SeededShuffle(a, ra);
  SeededShuffle(b, rb);
  REQUIRE(a == b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  REQUIRE(sorted == base);
}
