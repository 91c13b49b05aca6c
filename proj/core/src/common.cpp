#include "vnslab/common.hpp"

#include <algorithm>

namespace vnslab {

void parallel_blocks(std::size_t n, std::size_t block, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (block == 0) block = 1;
  const std::size_t nblocks = (n + block - 1) / block;
  if (threads <= 1 || nblocks == 1) {
    for (std::size_t b = 0; b < nblocks; ++b)
      fn(b, b * block, std::min(n, (b + 1) * block));
    return;
  }
  const int nt = std::min<std::size_t>(threads, nblocks);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t b = t; b < nblocks; b += nt)
        fn(b, b * block, std::min(n, (b + 1) * block));
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace vnslab
