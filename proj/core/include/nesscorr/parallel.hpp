#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nesscorr {

enum class Chunking { static_blocks, dynamic };

struct ParallelOptions {
  std::size_t workers = 1;
  Chunking chunking = Chunking::static_blocks;
  std::size_t chunk_size = 1;  // dynamic chunking only
};

// Default worker count from NESSCORR_WORKERS, else 1.
std::size_t default_worker_count();

// Calls body(i) for every i in [0, count). Each index is visited exactly once
// by exactly one worker; bodies must only write to state owned by index i.
// The first exception thrown by any body is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, const ParallelOptions& options, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::atomic<bool> stop{false};
  auto guarded = [&](auto&& run) {
    try {
      run();
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      stop = true;
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers);
  if (options.chunking == Chunking::static_blocks) {
    const std::size_t block = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * block;
      const std::size_t end = std::min(count, begin + block);
      pool.emplace_back([&, begin, end] {
        guarded([&] {
          for (std::size_t i = begin; i < end && !stop; ++i) body(i);
        });
      });
    }
  } else {
    std::atomic<std::size_t> next{0};
    const std::size_t chunk = std::max<std::size_t>(1, options.chunk_size);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        guarded([&] {
          while (!stop) {
            const std::size_t begin = next.fetch_add(chunk);
            if (begin >= count) break;
            const std::size_t end = std::min(count, begin + chunk);
            for (std::size_t i = begin; i < end; ++i) body(i);
          }
        });
      });
    }
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nesscorr
