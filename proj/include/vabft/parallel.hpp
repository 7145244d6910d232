#pragma once

#include <cstdint>
#include <functional>
#include <mutex>

namespace vabft {

/// Worker cap: VABFT_THREADS if set, hardware concurrency otherwise.
int max_threads();

/// Runs body(0..n-1) across a small thread pool. Bodies must be independent;
/// campaign code keeps determinism by writing into per-index slots and
/// aggregating in index order afterwards.
void parallel_for(int64_t n, const std::function<void(int64_t)>& body);

} // namespace vabft
