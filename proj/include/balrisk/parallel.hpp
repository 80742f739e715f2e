#pragma once

#include <cstddef>
#include <functional>

namespace balrisk {

// Worker count used when a call does not specify one. Initialized from the
// BRL_THREADS environment variable, else the hardware concurrency.
unsigned default_threads() noexcept;
void set_default_threads(unsigned threads) noexcept;

// Runs body(i) for i in [0, count) on a pool of `threads` workers that pull
// indices from a shared counter. Calls made from inside a worker run serially.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace balrisk
