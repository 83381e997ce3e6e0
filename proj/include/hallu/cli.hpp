#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "hallu/clock.hpp"
#include "hallu/http.hpp"

namespace hallu {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;          // bad flags, unreadable input, config errors
inline constexpr int partial = 2;        // some items ended up unannotated
inline constexpr int missing_key = 3;    // API key env var unset or rejected
inline constexpr int id_mismatch = 4;    // prediction/gold ids disagree or unknown id
}  // namespace exit_code

struct CliStats {
  std::size_t provider_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t wiki_calls = 0;
  std::size_t items = 0;
  std::size_t failed_items = 0;
};

/// Where the CLI talks to the outside world. Tests swap in fakes.
struct CliEnvironment {
  std::ostream& out;
  std::ostream& err;
  HttpClient* http = nullptr;  // transport for LLM and Wikipedia; real HTTPS when null
  Clock* clock = nullptr;      // system clock when null
  CliStats* stats = nullptr;   // filled by `annotate` when set
};

/// Entry point for `hallu annotate | evaluate | inspect`. args[0] is the
/// program name. Returns one of the exit_code values.
int run_cli(const std::vector<std::string>& args, CliEnvironment env);

}  // namespace hallu
