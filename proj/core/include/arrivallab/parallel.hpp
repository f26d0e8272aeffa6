#pragma once

#include <cstddef>
#include <functional>

namespace arrivallab::parallel {

/// Caps the number of worker threads used by data-parallel sweeps.
/// Values < 1 select std::thread::hardware_concurrency().
void set_max_jobs(int jobs);
int max_jobs();

/// Calls body(i) for every i in [0, count). Work is split into contiguous
/// chunks; callers write results into per-index slots and reduce afterwards
/// in index order, which keeps every reduction deterministic.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace arrivallab::parallel
