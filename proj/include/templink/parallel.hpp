// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace templink {

/// Process-wide worker cap; 0 means hardware concurrency.
void set_thread_count(std::size_t threads);
std::size_t thread_count();

/// Runs fn(i) for i in [0, n). Callers write results into slot i only, so the
/// outcome never depends on the number of workers or their schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace templink
