#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hallu/clock.hpp"
#include "hallu/dataset.hpp"
#include "hallu/http.hpp"
#include "hallu/llm.hpp"
#include "hallu/log.hpp"
#include "hallu/prompt.hpp"

namespace hallu {

struct KnowledgeBundle {
  std::vector<std::string> roles;
  std::string keyword;
  std::optional<std::string> raw_external;
  std::optional<std::string> refined_external;
  std::string provenance;  // URL of the Wikipedia page used
};

struct WikiPage {
  std::string title;
  std::string url;
  std::string wiki;  // subdomain the page came from
  std::string text;
};

struct WikipediaOptions {
  std::size_t max_chars = 8000;
  int max_retries = 2;
  std::chrono::milliseconds backoff{500};
  std::string user_agent = "hallu-annotate/1.0 (hallucination span annotation tool)";
};

/// Wikipedia search + plain-text extract over the MediaWiki action API.
class WikipediaClient {
 public:
  WikipediaClient(HttpClient& http, WikipediaOptions options = {},
                  Clock& clock = SystemClock::instance());

  /// First search hit for `keyword` on the item-language wiki, falling back to
  /// English when that wiki has no hit. The extract is cut to max_chars
  /// characters. Throws KnowledgeError on network failure after retries or
  /// when neither wiki has a hit.
  WikiPage fetch(const std::string& keyword, const std::string& lang);

  std::optional<std::string> search(const std::string& wiki, const std::string& keyword);
  std::string extract(const std::string& wiki, const std::string& title);

  static std::string search_url(const std::string& wiki, const std::string& keyword);
  static std::string extract_url(const std::string& wiki, const std::string& title);
  static std::string page_url(const std::string& wiki, const std::string& title);

  std::size_t calls() const { return calls_.load(); }
  const WikipediaOptions& options() const { return options_; }

 private:
  nlohmann::json get_json(const std::string& url);

  HttpClient& http_;
  WikipediaOptions options_;
  Clock& clock_;
  std::atomic<std::size_t> calls_{0};
};

struct KnowledgeOptions {
  std::string model;
  int max_tokens = 1024;
  int attempts = 2;  // LLM attempts before falling back
  std::size_t max_roles = 5;
  std::string fallback_role = "fact-checking expert";
  std::size_t fallback_chars = 2000;
};

/// Builds KnowledgeBundles. Results are cached in the gateway's cache by
/// (operation, item id, inputs); a repeated call makes no LLM or HTTP call.
class KnowledgeService {
 public:
  KnowledgeService(LlmGateway& llm, WikipediaClient* wiki, const PromptSet& prompts,
                   KnowledgeOptions options, LogSink log = stderr_sink());

  /// 1 to max_roles distinct identities; the fallback role after repeated
  /// malformed replies.
  std::vector<std::string> assign_roles(const QAItem& item);

  /// Throws KnowledgeError when the reply has no "Keyword:" line.
  std::string extract_keyword(const QAItem& item);

  /// Throws KnowledgeError; requires a Wikipedia client.
  WikiPage fetch_wikipedia(const QAItem& item, const std::string& keyword);

  /// The refined paragraph, or the first fallback_chars characters of `raw`
  /// after repeated malformed replies.
  std::string summarize_knowledge(const QAItem& item, const std::string& raw,
                                  const std::string& wiki_lang);

  /// Never throws for retrieval failures (AuthError still propagates); a
  /// failed chain leaves refined_external empty.
  KnowledgeBundle build_bundle(const QAItem& item, bool use_roles, bool use_external);

 private:
  CompletionRequest request(const QAItem& item, Purpose purpose, std::string prompt,
                            std::string seed_tag) const;

  LlmGateway& llm_;
  WikipediaClient* wiki_;
  const PromptSet& prompts_;
  KnowledgeOptions options_;
  LogSink log_;
};

/// First JSON object in an LLM reply, tolerating code fences and chatter.
std::optional<nlohmann::json> find_json_object(const std::string& reply);

/// Parses the `Identities` list of a role reply; nullopt when malformed.
std::optional<std::vector<std::string>> parse_roles_reply(const std::string& reply,
                                                          std::size_t max_roles);

/// Trimmed text after the first "Keyword:" label; nullopt when absent or empty.
std::optional<std::string> parse_keyword_reply(const std::string& reply);

/// The `Knowledge` paragraph of a summarization reply; nullopt when malformed.
std::optional<std::string> parse_summary_reply(const std::string& reply);

}  // namespace hallu
