#pragma once

#include <cstddef>
#include <functional>

namespace twk {

/// Process-wide worker count for batch-parallel loops. Defaults to 1.
/// Results never depend on the setting: every parallel loop maps pure
/// functions onto disjoint index ranges.
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, on up to
/// max_threads() workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace twk
