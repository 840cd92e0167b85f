#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "te/error.hpp"

namespace te {

struct ItemFailure {
  std::size_t index = 0;
  ErrorCode code = ErrorCode::BackendUnavailable;
  std::string message;
};

/// Per-item outcome of a fan-out: completed items keep their input position;
/// failed positions are empty and listed in `failures` (sorted by index).
template <typename T>
struct BatchResult {
  std::vector<std::optional<T>> items;
  std::vector<ItemFailure> failures;

  bool complete() const { return failures.empty(); }

  std::vector<T> values() const {
    std::vector<T> out;
    out.reserve(items.size());
    for (const auto& it : items) {
      if (it) out.push_back(*it);
    }
    return out;
  }
};

struct FanOutOptions {
  std::size_t concurrency = 1;
  /// Extra attempts for an item whose backend call failed transiently.
  int item_retries = 2;
};

inline bool is_transient(ErrorCode code) { return code == ErrorCode::BackendUnavailable; }

/// Runs fn(i) for i in [0, n) on up to `concurrency` threads. Library errors
/// are recorded per item; transient ones are retried first.
template <typename T>
BatchResult<T> fan_out(std::size_t n, const FanOutOptions& opts, const std::function<T(std::size_t)>& fn) {
  BatchResult<T> result;
  result.items.resize(n);
  std::mutex mu;

  auto run_item = [&](std::size_t i) {
    for (int attempt = 0;; ++attempt) {
      try {
        result.items[i] = fn(i);
        return;
      } catch (const Error& e) {
        if (is_transient(e.code()) && attempt < opts.item_retries) continue;
        std::lock_guard lock(mu);
        result.failures.push_back({i, e.code(), e.what()});
        return;
      }
    }
  };

  const std::size_t workers = std::min(std::max<std::size_t>(1, opts.concurrency), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) run_item(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) run_item(i);
      });
    }
  }
  std::sort(result.failures.begin(), result.failures.end(),
            [](const ItemFailure& a, const ItemFailure& b) { return a.index < b.index; });
  return result;
}

}  // namespace te
