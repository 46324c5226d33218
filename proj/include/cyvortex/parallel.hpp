/// @file parallel.hpp
/// @brief Worker-count control, row-parallel loops and deterministic reductions.
#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace cyv {

/// Number of workers used by parallel loops. Initialised from the
/// CYVORTEX_WORKERS environment variable, else the hardware concurrency.
int worker_count();

/// Override the worker count for the rest of the process (n >= 1).
void set_worker_count(int n);

/// Runs body(i) for i in [0, n). Iterations must be independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (tree) summation in a fixed order. The result depends only on the
/// values and their order, never on how they were produced.
double pairwise_sum(std::span<const double> values);

/// Fills partials[i] = row_sum(i) in parallel and reduces them pairwise.
double parallel_row_sum(std::size_t rows, const std::function<double(std::size_t)>& row_sum);

}  // namespace cyv
