// vuniq/rng.hpp

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

#ifndef VUNIQ_RNG_HPP_
#define VUNIQ_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

#include "vuniq/common.hpp"

namespace vuniq {

// SplitMix64: the output is a bijective hash of an incrementing counter, so
// streams derived from distinct seeds are independent for our purposes and
// the sequence is identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t Next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double NextDouble() {
    return static_cast<double>(Next() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1); never returns an endpoint.
  double NextDoubleOpen() {
    return (static_cast<double>(Next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the inverse CDF so that draws depend only on the
  // integer stream (one word per variate, no rejection).
  double NextNormal();

  // Unbiased integer in [0, n); rejection on the top of the 64-bit range.
  uint64_t NextBelow(uint64_t n) {
    if (n == 0) throw ValidationError("NextBelow: n must be positive");
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = Next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  uint64_t state_;
};

// Derives an independent stream seed from (seed, stream id).
inline uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  SplitMix64 rng(seed ^ (stream * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL));
  rng.Next();
  return rng.Next();
}

inline uint64_t Fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Inverse of the standard normal CDF.  Wichura (1988), algorithm AS 241,
// double-precision branch (PPND16); relative error below 1e-15.
inline double InverseNormalCdf(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError(Strf("InverseNormalCdf: p=%g outside (0,1)", p));
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r +
                   2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) *
                   r + 3.64784832476320460504e0) * r +
               5.76949722146069140550e0) * r + 4.63033784615654529590e0) * r +
             1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r +
                   5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) *
                   r + 6.89767334985100004550e-1) * r +
               1.67638483018380384940e0) * r + 2.05319162663775882187e0) * r +
             1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r +
                   2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) *
                   r + 2.96560571828504891230e-1) * r +
               1.78482653991729133580e0) * r + 5.46378491116411436990e0) * r +
             6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r +
                   1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) *
                   r + 1.48753612908506148525e-2) * r +
               1.36929880922735805310e-1) * r + 5.99832206555887937690e-1) * r +
             1.0);
  }
  return q < 0.0 ? -value : value;
}

inline double SplitMix64::NextNormal() {
  return InverseNormalCdf(NextDoubleOpen());
}

// Standard normal CDF.
inline double NormalCdf(double x) {
  return 0.5 * std::erfc(-x * M_SQRT1_2);
}

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void SeededShuffle(std::vector<T> &items, SplitMix64 &rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.NextBelow(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace vuniq

#endif  // VUNIQ_RNG_HPP_
