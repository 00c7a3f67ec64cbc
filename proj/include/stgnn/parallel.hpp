#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "stgnn/types.hpp"

namespace stgnn {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work items must be
// independent; callers get determinism by writing into pre-sized slots by
// index. The first exception thrown by any item is rethrown.
inline void parallel_for(Index jobs, Index count, const std::function<void(Index)>& fn) {
  if (count <= 0) return;
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || count == 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  const Index workers = std::min<Index>(jobs, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    threads.emplace_back([&, w]() {
      try {
        for (Index i = w; i < count; i += workers) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace stgnn
