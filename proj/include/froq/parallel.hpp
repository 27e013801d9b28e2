#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace froq {

/// Worker count from FROQ_THREADS, falling back to the hardware concurrency.
std::size_t default_thread_count();

/// Calls `body(i)` for every i in [0, n) on up to `threads` workers. Indices
/// are claimed dynamically, so `body` must only write to slot i of any shared
/// output. The first exception thrown by any call is rethrown after all
/// workers have stopped.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

/// A single input that could not be processed inside a batch.
struct ItemFailure {
  std::string path;
  std::string message;
};

/// Batch policy shared by every per-image pipeline: failures are reported,
/// and the batch aborts (BatchError) once more than 10% of items fail.
void enforce_failure_budget(std::span<const ItemFailure> failures, std::size_t total,
                            const std::string& what);

}  // namespace froq
