#include "hallu/clock.hpp"

#include <thread>

namespace hallu {

Clock::duration SystemClock::now() const {
  return std::chrono::duration_cast<duration>(std::chrono::steady_clock::now().time_since_epoch());
}

void SystemClock::sleep_for(duration d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

SystemClock& SystemClock::instance() {
  static SystemClock clock;
  return clock;
}

}  // namespace hallu
