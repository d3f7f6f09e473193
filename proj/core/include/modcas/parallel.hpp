#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace modcas {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x)
  {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs)
{
  CompensatedSum s;
  for (double x : xs)
    s.add(x);
  return s.value();
}

// Runs body(i) for i in [0, count) on up to `workers` threads. Work is
// handed out through an atomic counter; the body writes into caller-owned
// slots so any reduction done afterwards is independent of the schedule.
// The first exception cancels the remaining items and is rethrown.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& body)
{
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancelled{false};
  std::exception_ptr error;
  std::size_t error_index = count;
  std::mutex m;

  auto run = [&] {
    for (;;) {
      if (cancelled.load(std::memory_order_relaxed))
        return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count)
        return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(m);
        // keep the lowest failing index so the reported error is stable
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        cancelled = true;
      }
    }
  };

  const std::size_t n = workers > 1 ? std::min<std::size_t>(static_cast<std::size_t>(workers), count) : 1;
  if (n <= 1) {
    run();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (std::size_t t = 0; t < n; ++t)
      pool.emplace_back(run);
    for (auto& t : pool)
      t.join();
  }
  if (error)
    std::rethrow_exception(error);
}

} // namespace modcas
