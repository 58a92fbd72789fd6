#include "lgq/threads.hpp"

#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace lgq {

int worker_budget() {
  const char* env = std::getenv("LGQ_THREADS");
  if (env != nullptr && *env != '\0') {
    std::string s(env);
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(s, &pos);
    } catch (const std::exception&) {
      throw std::runtime_error("LGQ_THREADS must be a positive integer, got '" + s + "'");
    }
    if (pos != s.size() || v < 1 || v > 4096)
      throw std::runtime_error("LGQ_THREADS must be a positive integer, got '" + s + "'");
    return (int)v;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? (int)hc : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  std::size_t w = (std::size_t)worker_budget();
  if (w > n) w = n;
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(w);
  std::exception_ptr first_error = nullptr;
  std::mutex err_mtx;
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t]() {
      try {
        for (std::size_t i = t; i < n; i += w) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace lgq
