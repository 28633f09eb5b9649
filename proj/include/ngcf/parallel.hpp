#pragma once

#include <cstddef>
#include <functional>

namespace ngcf {

/// Worker cap from NGCF_THREADS; 1 when unset or unparsable.
unsigned thread_count();

/// Runs fn(i) for i in [0, n) on up to thread_count() threads. Work is handed
/// out by index, so results written per index do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ngcf
