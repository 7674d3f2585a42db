#include "isoscope/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace isoscope::par {

namespace {

std::atomic<int> g_threads{0};

int env_default() {
  if (const char* s = std::getenv("ISOSCOPE_THREADS")) {
    const int v = std::atoi(s);
    if (v > 0) return v;
  }
  return omp_get_max_threads();
}

}  // namespace

void set_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int threads() {
  const int t = g_threads.load();
  return t > 0 ? t : env_default();
}

void for_each_index_serial(int n, const std::function<void(int)>& fn) {
  for (int i = 0; i < n; ++i) fn(i);
}

void for_each_index(int n, const std::function<void(int)>& fn) {
  const int nt = threads();
  if (nt <= 1 || n <= 1 || omp_in_parallel()) {
    for_each_index_serial(n, fn);
    return;
  }
  // exceptions cannot cross an OpenMP region: capture the first one and
  // rethrow afterwards
  std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic, 1) num_threads(nt)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

int batch_count(std::int64_t n_items) {
  if (n_items <= 0) return 0;
  // fixed partition: one batch per 2048 items, capped; independent of workers
  return static_cast<int>(std::clamp<std::int64_t>((n_items + 2047) / 2048, 1, 128));
}

void batch_range(std::int64_t n_items, int n_batches, int b, std::int64_t* begin,
                 std::int64_t* end) {
  const std::int64_t lo = n_items * b / n_batches;
  const std::int64_t hi = n_items * (b + 1) / n_batches;
  *begin = lo;
  *end = hi;
}

}  // namespace isoscope::par
