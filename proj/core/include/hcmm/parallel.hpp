#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace hcmm {

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs body(begin, end) over contiguous chunks of [0, count). Chunks write to
// disjoint output slots, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::int64_t count, unsigned threads, Body&& body) {
  const auto workers = static_cast<std::int64_t>(
      std::min<std::int64_t>(resolve_threads(threads), std::max<std::int64_t>(count, 1)));
  if (workers <= 1) {
    body(std::int64_t{0}, count);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const std::int64_t chunk = (count + workers - 1) / workers;
    for (std::int64_t w = 0; w < workers; ++w) {
      const std::int64_t begin = w * chunk;
      const std::int64_t end = std::min(count, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, w, begin, end] {
        try {
          body(begin, end);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace hcmm
