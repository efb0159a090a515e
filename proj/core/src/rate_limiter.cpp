#include "phishtriage/rate_limiter.hpp"

#include <thread>

#include "phishtriage/error.hpp"

namespace phishtriage {

RateLimiter::RateLimiter(std::size_t max_requests, Clock::duration window)
    : max_requests_(max_requests), window_(window) {
  if (max_requests_ == 0) throw Error(ErrorCode::InvalidConfig, "rate limit must allow at least one request");
  if (window_ <= Clock::duration::zero()) throw Error(ErrorCode::InvalidConfig, "rate window must be positive");
}

void RateLimiter::acquire() {
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = Clock::now();
    while (!grants_.empty() && now - grants_.front() >= window_) grants_.pop_front();
    if (grants_.size() < max_requests_) {
      grants_.push_back(now);
      return;
    }
    const auto wake = grants_.front() + window_;
    lock.unlock();
    std::this_thread::sleep_until(wake);
    lock.lock();
  }
}

}  // namespace phishtriage
