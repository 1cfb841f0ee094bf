#ifndef DIPOLEKIT_PARALLEL_HPP
#define DIPOLEKIT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dipolekit {

/// Number of workers used by `parallel_map`. Defaults to the hardware count.
inline unsigned worker_count() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1u : n;
}

/// out[i] = f(i) for i in [0, n). Workers pull indices from a shared counter;
/// results land in index order so any later reduction is order-fixed.
/// The first exception thrown (lowest index) is rethrown.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, F&& f, unsigned workers = worker_count()) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

} // namespace dipolekit

#endif // DIPOLEKIT_PARALLEL_HPP
