#pragma once

#include <cstddef>
#include <functional>

namespace logitype {

/// Upper bound on worker threads used by bootstrap, cross-validation, policy
/// and multi-start loops. 0 means "use hardware concurrency".
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs task(i) for i in [0, n) on up to max_threads() workers. Tasks must
/// write to disjoint outputs; the first exception thrown is rethrown after
/// all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

/// Pairwise (cascade) summation; result depends only on input order.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace logitype
