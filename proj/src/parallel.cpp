#include "froq/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>

#include "froq/error.hpp"

namespace froq {

std::size_t default_thread_count() {
  if (const char* env = std::getenv("FROQ_THREADS"); env && *env) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end && *end == '\0' && value > 0) return static_cast<std::size_t>(value);
    fail(ErrorKind::kInvalidParameter, "FROQ_THREADS must be a positive integer");
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n);
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

void enforce_failure_budget(std::span<const ItemFailure> failures, std::size_t total,
                            const std::string& what) {
  if (failures.empty()) return;
  // Abort when failures exceed 10% of the batch.
  if (failures.size() * 10 > total) {
    std::string message = what + ": " + std::to_string(failures.size()) + " of " +
                          std::to_string(total) + " inputs failed";
    for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 5); ++i) {
      message += "\n  " + failures[i].path + ": " + failures[i].message;
    }
    fail(ErrorKind::kBatch, message);
  }
}

}  // namespace froq
