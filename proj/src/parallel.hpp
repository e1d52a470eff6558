#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace thermodiag::detail {

// Runs fn(k) for k in [0, count) on up to `threads` threads (strided). The
// first exception in index order is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < count; k += stride) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(threads < 1 ? 1 : static_cast<std::size_t>(threads), count);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace thermodiag::detail
