#include "hallu/llm.hpp"

#include <algorithm>
#include <cstdlib>

#include <json.hpp>

#include "hallu/error.hpp"

namespace hallu {

using nlohmann::json;

ProviderConfig provider_preset(const std::string& name) {
  ProviderConfig cfg;
  cfg.name = name;
  if (name == "mock") {
    cfg.requests_per_minute = 1'000'000;
    cfg.max_retries = 0;
    cfg.initial_backoff = std::chrono::milliseconds(0);
  } else if (name == "openai") {
    cfg.base_url = "https://api.openai.com/v1";
    cfg.api_key_env = "OPENAI_API_KEY";
    cfg.requests_per_minute = 500;
  } else if (name == "deepseek") {
    cfg.base_url = "https://api.deepseek.com";
    cfg.api_key_env = "DEEPSEEK_API_KEY";
    cfg.requests_per_minute = 60;
  }
  return cfg;
}

void validate(const CompletionRequest& req) {
  if (!(req.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (req.max_tokens <= 0) throw ConfigError("max_tokens must be > 0");
}

void validate(const ProviderConfig& cfg) {
  if (cfg.requests_per_minute <= 0) throw ConfigError("requests_per_minute must be > 0");
  if (cfg.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (cfg.name != "mock") {
    if (cfg.base_url.empty()) throw ConfigError("provider '" + cfg.name + "' needs a base URL");
    if (cfg.api_key_env.empty()) {
      throw ConfigError("provider '" + cfg.name + "' needs an API key environment variable");
    }
  }
}

std::string resolve_api_key(const ProviderConfig& cfg) {
  const char* value = std::getenv(cfg.api_key_env.c_str());
  if (!value || !*value) throw ConfigError("environment variable " + cfg.api_key_env + " is not set");
  return value;
}

OpenAiCompatibleProvider::OpenAiCompatibleProvider(ProviderConfig cfg, std::string api_key,
                                                   HttpClient& http)
    : cfg_(std::move(cfg)), api_key_(std::move(api_key)), http_(http) {}

std::string OpenAiCompatibleProvider::request_body(const CompletionRequest& req) {
  json messages = json::array();
  if (req.system_prompt) messages.push_back({{"role", "system"}, {"content", *req.system_prompt}});
  messages.push_back({{"role", "user"}, {"content", req.user_prompt}});
  json body{{"model", req.model},
            {"messages", std::move(messages)},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens}};
  return body.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string OpenAiCompatibleProvider::complete(const CompletionRequest& req) {
  auto url = cfg_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  const HttpHeaders headers{{"Authorization", "Bearer " + api_key_},
                            {"Content-Type", "application/json"}};
  const auto resp = http_.post(url, headers, request_body(req));

  if (resp.status == 0) throw TransientError("transport failure: " + resp.error);
  if (resp.status == 401) throw AuthError("provider rejected the API key (HTTP 401)");
  if (resp.status == 408 || resp.status == 429 || resp.status >= 500) {
    throw TransientError("HTTP " + std::to_string(resp.status));
  }
  if (resp.status != 200) {
    throw ProviderError("HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 300));
  }
  const auto doc = json::parse(resp.body, nullptr, false);
  if (doc.is_discarded()) throw TransientError("unparseable completion body");
  try {
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return {};
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw TransientError(std::string("unexpected completion shape: ") + e.what());
  }
}

RateLimiter::RateLimiter(int requests_per_minute, Clock& clock)
    : limit_(requests_per_minute), clock_(clock) {
  if (limit_ <= 0) throw ConfigError("requests_per_minute must be > 0");
}

void RateLimiter::acquire() {
  constexpr Clock::duration kWindow = std::chrono::seconds(60);
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = clock_.now();
    while (!stamps_.empty() && stamps_.front() <= now - kWindow) stamps_.pop_front();
    if (static_cast<int>(stamps_.size()) < limit_) {
      stamps_.push_back(now);
      return;
    }
    const auto wait = stamps_.front() + kWindow - now;
    lock.unlock();
    clock_.sleep_for(wait);
    lock.lock();
  }
}

LlmGateway::LlmGateway(std::shared_ptr<LlmProvider> provider, ProviderConfig cfg,
                       std::shared_ptr<ResponseCache> cache, Clock& clock)
    : provider_(std::move(provider)),
      cfg_(std::move(cfg)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      clock_(clock),
      limiter_(cfg_.requests_per_minute, clock) {
  validate(cfg_);
}

std::string LlmGateway::cache_key(const CompletionRequest& req) const {
  json inputs{{"provider", cfg_.name},
              {"model", req.model},
              {"system", req.system_prompt ? json(*req.system_prompt) : json(nullptr)},
              {"user", req.user_prompt},
              {"temperature", req.temperature},
              {"max_tokens", req.max_tokens},
              {"seed_tag", req.seed_tag}};
  return ResponseCache::make_key("complete", inputs);
}

std::string LlmGateway::complete(const CompletionRequest& req) {
  validate(req);
  const auto key = cache_key(req);
  if (auto hit = cache_->get(key); hit && hit->is_string()) {
    ++cache_hits_;
    return hit->get<std::string>();
  }

  if (auth_rejected_) throw AuthError("provider '" + cfg_.name + "' already rejected the API key");

  auto backoff = std::chrono::duration_cast<Clock::duration>(cfg_.initial_backoff);
  const auto cap = std::chrono::duration_cast<Clock::duration>(cfg_.max_backoff);
  for (int attempt = 0;; ++attempt) {
    limiter_.acquire();
    ++provider_calls_;
    try {
      auto text = provider_->complete(req);
      return cache_->put_if_absent(key, "complete", json(std::move(text))).get<std::string>();
    } catch (const AuthError&) {
      auth_rejected_ = true;
      throw;
    } catch (const TransientError& e) {
      if (attempt >= cfg_.max_retries) {
        throw ProviderError("giving up after " + std::to_string(attempt + 1) +
                            " attempts: " + e.what());
      }
    }
    clock_.sleep_for(backoff);
    backoff = std::min(backoff * 2, cap);
  }
}

}  // namespace hallu
