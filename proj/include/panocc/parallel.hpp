#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <thread>
#include <vector>

namespace panocc {

// Worker count used by every parallel kernel. Defaults to PANOCC_THREADS when
// set, otherwise hardware concurrency. Values < 1 reset to the default.
int num_threads();
void set_num_threads(int n);

// Runs fn(i) for i in [0, n). Each index is visited exactly once; callers only
// write to per-index outputs, so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(num_threads()), n);
  if (workers <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (std::size_t i = 0; i < std::min(n, chunk); ++i) fn(i);
}

// Pairwise (tree) summation with a fixed split rule. The association order
// depends only on the input length.
double pairwise_sum(std::span<const double> values);

// Sum whose result does not depend on the order of `values`: terms are sorted
// before accumulation. Meant for short vectors (expert mixtures, softmax).
double order_invariant_sum(std::span<const double> values);

}  // namespace panocc
