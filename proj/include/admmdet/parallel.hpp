#pragma once

#include <cstddef>
#include <functional>

namespace admmdet {

/// Caps the worker count used by parallel_for; 0 restores the hardware default.
void set_max_threads(std::size_t n) noexcept;
std::size_t max_threads() noexcept;

/// Calls fn(i) for every i in [0, n), spread over up to max_threads() workers.
/// Each index is visited exactly once; callers write results to per-index
/// slots, so outcomes do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace admmdet
