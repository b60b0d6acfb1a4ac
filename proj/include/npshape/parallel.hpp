#pragma once

// Row-parallel helper for matrix assembly. Each index writes only its own
// output row, so results are bit-identical for any thread count. The env var
// NP_SHAPE_THREADS caps the pool; unset or <=1 runs serially.

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace npshape {

inline int thread_cap() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("NP_SHAPE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return hw;
}

template <class Fn>
void parallel_for(int n, Fn&& fn) {
  const int nt = std::min(thread_cap(), n);
  if (nt <= 1 || n < 64) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (int i = t; i < n; i += nt) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace npshape
