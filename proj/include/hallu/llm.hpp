#pragma once

#include <atomic>
#include <chrono>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "hallu/cache.hpp"
#include "hallu/clock.hpp"
#include "hallu/http.hpp"

namespace hallu {

/// What a request is for. Only the mock provider looks at it.
enum class Purpose { annotate, roles, keyword, summarize, other };

struct CompletionRequest {
  std::string model;
  std::optional<std::string> system_prompt;
  std::string user_prompt;
  double temperature = 1.0;
  int max_tokens = 2048;
  /// Distinguishes repeated samples of one prompt; part of the cache key.
  std::string seed_tag;

  // Routing metadata, not sent to the provider and not part of the cache key.
  Purpose purpose = Purpose::other;
  std::string item_id;
};

struct ProviderConfig {
  std::string name = "mock";
  std::string base_url;
  std::string api_key_env;
  int requests_per_minute = 600;
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{1000};
  std::chrono::milliseconds max_backoff{60000};
};

/// Known provider presets: "mock", "openai", "deepseek". Any other name comes
/// back bare and needs an explicit base_url and api_key_env to validate.
ProviderConfig provider_preset(const std::string& name);

void validate(const CompletionRequest& req);
void validate(const ProviderConfig& cfg);

/// Reads cfg.api_key_env. Throws ConfigError naming the variable when unset.
std::string resolve_api_key(const ProviderConfig& cfg);

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  /// Throws AuthError, TransientError (retryable) or ProviderError.
  virtual std::string complete(const CompletionRequest& req) = 0;
};

/// OpenAI-compatible chat-completions over HTTP(S).
class OpenAiCompatibleProvider final : public LlmProvider {
 public:
  OpenAiCompatibleProvider(ProviderConfig cfg, std::string api_key, HttpClient& http);
  std::string complete(const CompletionRequest& req) override;

  static std::string request_body(const CompletionRequest& req);

 private:
  ProviderConfig cfg_;
  std::string api_key_;
  HttpClient& http_;
};

/// Sliding 60-second window. acquire() blocks (via the clock) until a slot
/// is free.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, Clock& clock);
  void acquire();

 private:
  int limit_;
  Clock& clock_;
  std::mutex mutex_;
  std::deque<Clock::duration> stamps_;
};

/// Cached, rate-limited, retrying front end for one provider.
class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<LlmProvider> provider, ProviderConfig cfg,
             std::shared_ptr<ResponseCache> cache, Clock& clock = SystemClock::instance());

  /// Cache hit returns immediately. Otherwise retries transient failures with
  /// exponential backoff up to max_retries; AuthError is rethrown at once and
  /// every later uncached call fails the same way without reaching the
  /// provider. Throws ProviderError once retries are exhausted.
  std::string complete(const CompletionRequest& req);

  std::string cache_key(const CompletionRequest& req) const;

  std::size_t provider_calls() const { return provider_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  const ProviderConfig& config() const { return cfg_; }
  ResponseCache& cache() { return *cache_; }
  Clock& clock() { return clock_; }

 private:
  std::shared_ptr<LlmProvider> provider_;
  ProviderConfig cfg_;
  std::shared_ptr<ResponseCache> cache_;
  Clock& clock_;
  RateLimiter limiter_;
  std::atomic<std::size_t> provider_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
  std::atomic<bool> auth_rejected_{false};
};

}  // namespace hallu
