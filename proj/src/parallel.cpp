#include "lindtomo/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lindtomo {

namespace {

std::atomic<int> g_max_threads{0};
thread_local bool t_in_worker = false;

int env_threads() {
  if (const char* env = std::getenv("LINDTOMO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 0;
}

}  // namespace

void set_max_threads(int n) { g_max_threads.store(std::max(n, 0)); }

int max_threads() {
  if (const int n = g_max_threads.load(); n > 0) return n;
  if (const int n = env_threads(); n > 0) return n;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      t_in_worker ? 1 : std::min<std::size_t>(n, static_cast<std::size_t>(max_threads()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    t_in_worker = true;
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
    t_in_worker = false;
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace lindtomo
