#pragma once

#include <cstddef>
#include <functional>

namespace koopkern {

/// Number of worker threads used by batch operations (Gram assembly,
/// grid evaluation). Defaults to 1. Results never depend on this value:
/// every task writes a disjoint output slot.
void set_num_threads(int n);
[[nodiscard]] int num_threads() noexcept;

/// Runs body(i) for i in [0, n). Exceptions thrown by any task are
/// rethrown on the calling thread (the one with the lowest index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace koopkern
