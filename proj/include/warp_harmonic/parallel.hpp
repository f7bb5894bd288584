#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace warp_harmonic {

/// Worker count for data-parallel assembly. Reads WARP_HARMONIC_THREADS on first use
/// (0 or unset = hardware concurrency); set_thread_count overrides it.
int thread_count();
void set_thread_count(int n);

/// Fixed block size of every parallel reduction. Block boundaries never depend on the
/// thread count, so reductions are bit-identical for any number of workers.
inline constexpr std::size_t kBlockSize = 2048;

/// Runs body(begin, end) over [0, n) in blocks of kBlockSize.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

/// Sums block partials body(begin, end) with a pairwise tree in block order.
double parallel_sum(std::size_t n, const std::function<double(std::size_t, std::size_t)>& body);

/// Pairwise (tree) summation of a vector, deterministic for a fixed input order.
double pairwise_sum(const std::vector<double>& values);

}  // namespace warp_harmonic
