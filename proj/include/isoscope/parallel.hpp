#pragma once

#include <cstdint>
#include <functional>

namespace isoscope::par {

/// Worker count used by parallel loops. 0 = library default
/// (ISOSCOPE_THREADS env var, else OpenMP default).
void set_threads(int n);
int threads();

/// Runs fn(i) for i in [0, n), possibly in parallel (OpenMP).
/// fn must write its result into a per-index slot; callers merge the slots
/// in index order afterwards, so results are identical for any worker count.
/// Nested calls run serially.
void for_each_index(int n, const std::function<void(int)>& fn);

/// Serial reference twin of for_each_index, kept for testing and benchmarks.
void for_each_index_serial(int n, const std::function<void(int)>& fn);

/// Fixed batch partition of n_items work items. Depends only on n_items,
/// never on the worker count.
int batch_count(std::int64_t n_items);
/// Half-open range [begin, end) of batch b out of n_batches over n_items.
void batch_range(std::int64_t n_items, int n_batches, int b,
                 std::int64_t* begin, std::int64_t* end);

}  // namespace isoscope::par
