#pragma once

#include <cstddef>
#include <functional>

namespace idid {

// Worker count: explicit request if positive, otherwise hardware concurrency,
// always capped by the IDID_THREADS environment variable when set.
unsigned resolve_thread_count(int requested = 0);

// Runs fn(i) for i in [0, count) across workers. Iterations must be
// independent; exceptions propagate (the first one thrown wins).
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace idid
