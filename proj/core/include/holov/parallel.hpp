// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace holov {

/// Worker cap: HOLOV_THREADS when set (>=1), otherwise hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across worker threads in contiguous chunks.
/// Callers write to index-addressed slots, so results do not depend on the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace holov
