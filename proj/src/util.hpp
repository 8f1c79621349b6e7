#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace mml {

// splitmix64; used to derive independent seed streams.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MMLOGIT_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) on up to nthreads workers. Each index is
// handled exactly once; callers keep results in per-index slots so the
// outcome does not depend on scheduling.
inline void parallel_for(int count, int nthreads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  nthreads = std::min(nthreads, count);
  if (nthreads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  workers.reserve(nthreads);
  for (int w = 0; w < nthreads; ++w) {
    workers.emplace_back([&, w] {
      for (int i = w; i < count; i += nthreads) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace mml
