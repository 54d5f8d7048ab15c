#pragma once

#include <functional>

namespace edgelab {

/// Worker count: EDL_THREADS if set and positive, otherwise hardware concurrency.
int thread_count();

/// Runs body(i) for i in [0, n). Each index must write only its own outputs.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace edgelab
