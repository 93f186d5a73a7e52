/*
 * (C) Copyright 2026 The obs-impact Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#ifndef OBSIMPACT_PARALLEL_H_
#define OBSIMPACT_PARALLEL_H_

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace obsimpact {

/// Runs body(i) for i in [0, count) on up to `jobs` threads, strided so that
/// each index is handled by exactly one thread.  The first exception thrown by
/// any worker is rethrown on the caller.
inline void parallelFor(int count, int jobs, const std::function<void(int)> & body) {
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> failures(jobs);
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (int i = t; i < count; i += jobs) body(i);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    });
  }
  for (auto & th : pool) th.join();
  for (auto & f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

}  // namespace obsimpact

#endif  // OBSIMPACT_PARALLEL_H_
