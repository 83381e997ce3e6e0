#include "hallu/log.hpp"

#include <iostream>
#include <mutex>

namespace hallu {

LogSink stderr_sink() {
  return [](const std::string& message) {
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    std::cerr << "warning: " << message << '\n';
  };
}

}  // namespace hallu
