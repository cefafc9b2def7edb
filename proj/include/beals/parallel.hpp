#pragma once

#include <cstddef>
#include <functional>

namespace beals {

/// Runs body(i) for i in [0, n) on up to `workers` threads. Iterations are
/// dealt out in contiguous chunks, so results never depend on the worker count
/// as long as body(i) only writes to slots owned by i.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace beals
