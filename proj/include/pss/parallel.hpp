#pragma once

// Index-parallel loop and pairwise summation. Results are stored per index
// and reduced in a fixed order, so they do not depend on the thread count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace pss {

// PSS_THREADS if set and positive, otherwise the hardware concurrency.
inline std::size_t worker_count() {
  if (const char* env = std::getenv("PSS_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (...) {
    }
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

struct SampleStats {
  double mean = 0.0;
  double half_width_95 = 0.0;
  double std_error = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& x) {
  SampleStats s;
  const std::size_t n = x.size();
  if (n == 0) return s;
  s.mean = pairwise_sum(x) / static_cast<double>(n);
  if (n < 2) return s;
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (x[i] - s.mean) * (x[i] - s.mean);
  const double var = pairwise_sum(dev) / static_cast<double>(n - 1);
  s.std_error = std::sqrt(var / static_cast<double>(n));
  s.half_width_95 = 1.959963984540054 * s.std_error;
  return s;
}

}  // namespace pss
