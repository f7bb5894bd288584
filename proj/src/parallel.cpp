#include "warp_harmonic/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace warp_harmonic {

namespace {

std::atomic<int> g_threads{-1};

int threads_from_env() {
  const char* env = std::getenv("WARP_HARMONIC_THREADS");
  int n = 0;
  if (env != nullptr) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      n = 0;
    }
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

double pairwise(const double* x, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return x[0];
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise(x, half) + pairwise(x + half, n - half);
}

}  // namespace

int thread_count() {
  int n = g_threads.load();
  if (n < 0) {
    n = threads_from_env();
    g_threads.store(n);
  }
  return n;
}

void set_thread_count(int n) { g_threads.store(n <= 0 ? threads_from_env() : n); }

void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  const auto workers = static_cast<std::size_t>(std::min<std::size_t>(thread_count(), blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) body(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1)) {
      body(b * kBlockSize, std::min(n, (b + 1) * kBlockSize));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& body) {
  const std::size_t blocks = (n + kBlockSize - 1) / kBlockSize;
  std::vector<double> partial(blocks, 0.0);
  parallel_blocks(n, [&](std::size_t begin, std::size_t end) {
    partial[begin / kBlockSize] = body(begin, end);
  });
  return pairwise_sum(partial);
}

double pairwise_sum(const std::vector<double>& values) {
  return pairwise(values.data(), values.size());
}

}  // namespace warp_harmonic
