#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ionforge {

/// Worker cap: IONFORGE_THREADS if set and positive, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("IONFORGE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(begin, end) over contiguous chunks of [0, count). Each index is
/// visited exactly once; fn must only write state owned by its indices.
template <typename Fn>
void parallel_for(long count, Fn&& fn, int threads = thread_count()) {
  if (count <= 0) return;
  const long workers = std::min<long>(threads, count);
  if (workers <= 1) {
    fn(0L, count);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const long chunk = (count + workers - 1) / workers;
    for (long w = 0; w < workers; ++w) {
      const long b = w * chunk, e = std::min(count, b + chunk);
      if (b < e)
        pool.emplace_back([&fn, &errors, w, b, e] {
          try {
            fn(b, e);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace ionforge
