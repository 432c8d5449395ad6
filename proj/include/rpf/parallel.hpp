#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rpf {

/// Worker count: hardware concurrency, capped by the RPF_THREADS
/// environment variable when it is set to a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads.
/// Each index is visited exactly once; body must only write to slot i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise tree sum with fan-in 2 over the values in index order.
/// The association order depends only on values.size(), so the result is
/// bitwise reproducible regardless of how the values were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace rpf
