#ifndef SYNTHTS_CORE_PARALLEL_HPP
#define SYNTHTS_CORE_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace synthts {

// Number of hardware execution units, at least 1.
std::size_t default_workers();

// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks must
// write only to their own output slot; callers reduce afterwards in index
// order so results do not depend on scheduling. The first exception thrown
// by any task is rethrown after all threads join.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

}  // namespace synthts

#endif  // SYNTHTS_CORE_PARALLEL_HPP
