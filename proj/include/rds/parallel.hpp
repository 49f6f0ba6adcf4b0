#pragma once

#include <cstddef>
#include <functional>

namespace rds {

/// Worker count: RDS_THREADS if set and positive, else hardware concurrency.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) on `threads` workers pulling indices from
/// a shared counter. Callers write results into slot i, so output never
/// depends on scheduling. The first exception thrown by a body is rethrown.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace rds
