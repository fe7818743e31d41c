#pragma once

#include <functional>

namespace ranumopt {

// Worker cap for data-parallel loops: min(hardware_concurrency, RA_NUMOPT_THREADS).
// RA_NUMOPT_THREADS is read once per process; values < 1 or unparsable are ignored.
int max_threads();

// Runs f(i) for i in [0, n) on up to max_threads() workers over contiguous
// blocks. Each index must write only its own output slot; with that contract
// the result is schedule-independent and therefore deterministic. Nested
// calls degrade to serial execution. Exceptions propagate (first one wins).
void parallel_for(int n, const std::function<void(int)>& f);

}  // namespace ranumopt
