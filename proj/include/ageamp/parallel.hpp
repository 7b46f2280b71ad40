#ifndef AGEAMP_PARALLEL_HPP
#define AGEAMP_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace ageamp {

/// Thread count from AGEAMP_THREADS, else 1.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("AGEAMP_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

/// Evaluates f(0), ..., f(n-1) on up to `threads` workers. Results are
/// returned in index order. If any call throws, the exception of the lowest
/// failing index is rethrown after all workers finish.
template <typename F>
auto parallel_map(std::size_t n, F&& f, unsigned threads = 1)
    -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);

  auto run_one = [&](std::size_t i) {
    try {
      slots[i].emplace(f(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) run_one(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace ageamp

#endif  // AGEAMP_PARALLEL_HPP
