#pragma once

#include <cstddef>
#include <functional>

namespace lindtomo {

// Worker cap for parallel_for: the value set by set_max_threads (the CLI's
// --threads), else LINDTOMO_THREADS, else hardware concurrency.
void set_max_threads(int n);
int max_threads();

// Runs body(i) for i in [0, n). Calls made from inside a worker run
// serially, so nested parallel regions never oversubscribe. The first
// exception thrown by any body is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lindtomo
