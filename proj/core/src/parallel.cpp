#include "kerek/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace kerek {

int thread_count() {
  if (const char* env = std::getenv("KEREK_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return int(std::min(v, 256L));
    return 1;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(std::min(hw, 256u));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk) {
  if (n == 0) return;
  std::size_t workers = std::min<std::size_t>(std::size_t(thread_count()), n);
  if (workers <= 1) {
    chunk(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::size_t per = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t b = w * per, e = std::min(n, b + per);
    if (b >= e) break;
    pool.emplace_back([&chunk, b, e] { chunk(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace kerek
