#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace conicip::detail {

/// Runs fn(i) for i in [0, count) on up to `threads` workers and returns once
/// every call has finished. The calls must touch disjoint data.
template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  constexpr int kMinPerWorker = 32;
  const int workers = std::min(threads, count / kMinPerWorker);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      const int begin = static_cast<int>(static_cast<long>(count) * w / workers);
      const int end = static_cast<int>(static_cast<long>(count) * (w + 1) / workers);
      pool.emplace_back([&, begin, end] {
        try {
          for (int i = begin; i < end; ++i) fn(i);
        } catch (...) {
          const std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace conicip::detail
