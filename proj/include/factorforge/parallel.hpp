#pragma once

#include <cstddef>
#include <functional>

namespace factorforge {

/// Worker cap used by `parallel_for`. Zero means "not set": FACTORFORGE_THREADS, then 1.
void set_thread_count(int threads);
int thread_count();

/// Runs `body(i)` for i in [0, n). Each index writes only its own output slot, so results do
/// not depend on the number of workers. Nested calls run inline on the calling worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace factorforge
