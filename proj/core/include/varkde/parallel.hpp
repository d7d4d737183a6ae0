#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace varkde {

/// Calls `body(i)` for every i in [0, n) on up to `threads` workers (0 picks the
/// hardware concurrency). Work is handed out by index, so callers that write
/// results into slot i get output independent of scheduling. The first
/// exception thrown by a body is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

/// splitmix64 step; used to derive independent, portable per-task seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

}  // namespace varkde
