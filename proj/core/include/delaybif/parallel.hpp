#pragma once

#include <cstddef>
#include <functional>

namespace delaybif {

/// Worker count: DELAYBIF_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Each index is processed exactly once; results
/// written to index-addressed storage are therefore deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace delaybif
