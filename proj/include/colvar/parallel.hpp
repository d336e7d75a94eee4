#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace colvar {

namespace detail {
inline thread_local bool in_worker = false;
}

// Number of workers to use for `jobs` independent tasks. COLVAR_THREADS caps
// the pool; unset or invalid values fall back to the hardware count.
inline std::size_t worker_count(std::size_t jobs) {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COLVAR_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) cap = static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::min(cap, jobs));
}

// Runs body(i) for i in [0, n). Nested calls from inside a worker run inline so
// per-epsilon loops inside per-scenario loops do not oversubscribe. If several
// tasks throw, the exception of the lowest index wins, which keeps error
// reporting deterministic.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  std::size_t workers = detail::in_worker ? 1 : worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::optional<std::size_t> failed_at;
  std::exception_ptr failure;
  auto run = [&] {
    detail::in_worker = true;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failed_at || i < *failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
    detail::in_worker = false;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Ordered map: result[i] = f(i) regardless of scheduling.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& f) {
  std::vector<std::optional<T>> slots(n);
  parallel_for(n, [&](std::size_t i) { slots[i].emplace(f(i)); });
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace colvar
