#pragma once

#include <atomic>
#include <chrono>

namespace hallu {

/// Time source for rate limiting and backoff. Tests substitute ManualClock.
class Clock {
 public:
  using duration = std::chrono::nanoseconds;

  virtual ~Clock() = default;
  virtual duration now() const = 0;
  virtual void sleep_for(duration d) = 0;
};

class SystemClock final : public Clock {
 public:
  duration now() const override;
  void sleep_for(duration d) override;

  static SystemClock& instance();
};

/// Virtual time: sleeping advances the clock instantly.
class ManualClock final : public Clock {
 public:
  duration now() const override { return duration(now_.load()); }
  void sleep_for(duration d) override {
    if (d.count() > 0) now_ += d.count();
  }
  void advance(duration d) { sleep_for(d); }

 private:
  std::atomic<duration::rep> now_{0};
};

}  // namespace hallu
