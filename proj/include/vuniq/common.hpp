// vuniq/common.hpp

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

#ifndef VUNIQ_COMMON_HPP_
#define VUNIQ_COMMON_HPP_

#include <atomic>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vuniq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration / usage problems (bad flags, malformed config document).
class ConfigError : public Error { public: using Error::Error; };

// Data problems: unreadable files, malformed records, contract violations.
class IoError : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };
class ValidationError : public Error { public: using Error::Error; };
class DimensionMismatchError : public Error { public: using Error::Error; };
class InsufficientDataError : public Error { public: using Error::Error; };
class EmptyInputError : public Error { public: using Error::Error; };
class DegenerateInputError : public Error { public: using Error::Error; };

// Numerical problems: singular matrices, non-convergence.
class NumericalError : public Error { public: using Error::Error; };

inline std::string Strf(const char *fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[1024];
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

inline void Warn(const std::string &msg) {
  std::cerr << "vuniq WARNING: " << msg << "\n";
}

// Worker count for parallel sections, from VUNIQ_WORKERS (default: hardware).
inline int WorkerCount() {
  if (const char *env = std::getenv("VUNIQ_WORKERS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, n).  Each index must write only to its own output
// slot; with that discipline the result is identical for any worker count.
template <typename Fn>
void ParallelFor(std::size_t n, Fn &&fn) {
  int workers = WorkerCount();
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int spawn = static_cast<int>(std::min<std::size_t>(workers, n));
  pool.reserve(spawn);
  for (int w = 0; w < spawn; ++w) pool.emplace_back(worker);
  for (auto &t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vuniq

#endif  // VUNIQ_COMMON_HPP_
