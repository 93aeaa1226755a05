#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace catbrw {

inline constexpr std::int64_t kChunkSize = 4096;

// Splits [0, total) into fixed chunks, runs body(state, begin, end) on a worker
// pool and merges chunk states in chunk order. Chunking does not depend on the
// thread count, so the merged result does not either.
template <class Make, class Body, class Merge>
auto run_chunked(std::int64_t total, int threads, Make make, Body body, Merge merge) {
  using State = decltype(make());
  const std::int64_t chunks = (total + kChunkSize - 1) / kChunkSize;
  std::vector<std::optional<State>> parts(static_cast<std::size_t>(chunks));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::int64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        State s = make();
        body(s, c * kChunkSize, std::min(total, (c + 1) * kChunkSize));
        parts[static_cast<std::size_t>(c)].emplace(std::move(s));
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(chunks);
        return;
      }
    }
  };

  const int n = std::max(1, std::min<int>(threads, static_cast<int>(std::max<std::int64_t>(chunks, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  State merged = make();
  for (auto& p : parts) merge(merged, *p);
  return merged;
}

}  // namespace catbrw
