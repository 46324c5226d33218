#include "cyvortex/parallel.hpp"

#include "cyvortex/error.hpp"

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>

#include <algorithm>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cyv {
namespace {

std::mutex g_mutex;
int g_workers = 0;
std::unique_ptr<tbb::global_control> g_control;

int default_workers() {
  if (const char* env = std::getenv("CYVORTEX_WORKERS")) {
    try {
      int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void apply_locked(int n) {
  g_workers = n;
  g_control.reset();
  g_control = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                    static_cast<std::size_t>(n));
}

}  // namespace

int worker_count() {
  std::lock_guard lock(g_mutex);
  if (g_workers == 0) apply_locked(default_workers());
  return g_workers;
}

void set_worker_count(int n) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "worker count must be at least 1");
  std::lock_guard lock(g_mutex);
  apply_locked(n);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  if (n == 0) return;
  if (worker_count() == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n),
                    [&](const tbb::blocked_range<std::size_t>& r) {
                      for (std::size_t i = r.begin(); i != r.end(); ++i) body(i);
                    });
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double parallel_row_sum(std::size_t rows, const std::function<double(std::size_t)>& row_sum) {
  std::vector<double> partials(rows);
  parallel_for(rows, [&](std::size_t i) { partials[i] = row_sum(i); });
  return pairwise_sum(partials);
}

}  // namespace cyv
