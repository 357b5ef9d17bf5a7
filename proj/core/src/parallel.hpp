#ifndef ORTHOMEASURE_SRC_PARALLEL_HPP
#define ORTHOMEASURE_SRC_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace orthomeasure::detail {

/// min(hardware threads, ORTHOMEASURE_THREADS if set), at least 1.
std::size_t worker_threads();

/// Calls body(begin, end) on contiguous chunks of [0, n). Work must not
/// depend on the chunking; the first exception is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 1) {
  const std::size_t workers =
      std::min(worker_threads(), std::max<std::size_t>(1, n / std::max<std::size_t>(1, min_chunk)));
  if (workers <= 1 || n < 2) {
    if (n > 0) body(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, w, begin, end] {
      try {
        body(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace orthomeasure::detail

#endif  // ORTHOMEASURE_SRC_PARALLEL_HPP
