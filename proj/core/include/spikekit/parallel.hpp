#pragma once

#include <cstdint>
#include <functional>

namespace spikekit {

// Process-wide worker count for kernels. 0 selects hardware concurrency.
void set_thread_count(int n);
int thread_count();

// Runs fn(begin, end) over contiguous chunks of [0, n). Each chunk is handled
// by exactly one worker and chunk starts are multiples of `align`, so workers
// writing disjoint element ranges never share a packed byte. Results must not
// depend on the partition; every element is computed independently.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn,
                  int64_t align = 1);

}  // namespace spikekit
