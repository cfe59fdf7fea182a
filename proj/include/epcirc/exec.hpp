#pragma once

// Grid fan-out helper: every call site writes to its own slot, so the
// parallel path is bitwise-identical to the serial one (asserted in tests).

#include <cstddef>

namespace epcirc {

enum class ExecPolicy { serial, parallel };

template <typename F>
void for_each_index(std::size_t n, ExecPolicy policy, F&& body) {
    if (policy == ExecPolicy::parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)n; ++i) body(std::size_t(i));
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
}

}  // namespace epcirc
