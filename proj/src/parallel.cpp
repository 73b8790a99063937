#include "panocc/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace panocc {
namespace {

int default_threads() {
  if (const char* env = std::getenv("PANOCC_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::atomic<int>& thread_setting() {
  static std::atomic<int> setting{default_threads()};
  return setting;
}

constexpr std::size_t kPairwiseLeaf = 32;

}  // namespace

int num_threads() { return thread_setting().load(std::memory_order_relaxed); }

void set_num_threads(int n) {
  thread_setting().store(n >= 1 ? n : default_threads(), std::memory_order_relaxed);
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= kPairwiseLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double order_invariant_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double acc = 0.0;
  for (double v : sorted) acc += v;
  return acc;
}

}  // namespace panocc
