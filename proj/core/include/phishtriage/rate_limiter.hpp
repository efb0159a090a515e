#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <mutex>

namespace phishtriage {

/// Sliding-window limiter: at most `max_requests` grants in any `window`.
/// acquire() blocks until a slot frees up. Thread-safe.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(std::size_t max_requests,
                       Clock::duration window = std::chrono::minutes(1));

  void acquire();

  std::size_t max_requests() const noexcept { return max_requests_; }
  Clock::duration window() const noexcept { return window_; }

 private:
  std::size_t max_requests_;
  Clock::duration window_;
  std::mutex mutex_;
  std::deque<Clock::time_point> grants_;
};

}  // namespace phishtriage
