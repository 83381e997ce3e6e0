#pragma once

#include <functional>
#include <string>

namespace hallu {

/// Receives warnings and degraded-mode notices. Must be thread-safe.
using LogSink = std::function<void(const std::string&)>;

/// Writes each message as one line on stderr.
LogSink stderr_sink();

}  // namespace hallu
