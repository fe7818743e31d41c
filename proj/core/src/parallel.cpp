#include "ranumopt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ranumopt {

static int read_thread_cap() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  const char* env = std::getenv("RA_NUMOPT_THREADS");
  if (env != nullptr) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) hw = std::min<long>(hw, v);
  }
  return hw;
}

int max_threads() {
  static const int cap = read_thread_cap();
  return cap;
}

namespace {
thread_local bool in_parallel_region = false;
}

void parallel_for(int n, const std::function<void(int)>& f) {
  if (n <= 0) return;
  const int workers = std::min(max_threads(), n);
  if (workers <= 1 || in_parallel_region) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }

  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run_block = [&](int lo, int hi) {
    in_parallel_region = true;
    try {
      for (int i = lo; i < hi; ++i) f(i);
    } catch (...) {
      std::lock_guard<std::mutex> g(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
    in_parallel_region = false;
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers) - 1);
  const int base = n / workers, rem = n % workers;
  int start = 0;
  for (int w = 0; w < workers; ++w) {
    const int len = base + (w < rem ? 1 : 0);
    const int lo = start, hi = start + len;
    start = hi;
    if (w + 1 == workers) {
      run_block(lo, hi);
    } else {
      pool.emplace_back(run_block, lo, hi);
    }
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace ranumopt
