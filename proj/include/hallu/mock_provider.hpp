#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "hallu/dataset.hpp"
#include "hallu/llm.hpp"
#include "hallu/span.hpp"

namespace hallu {

/// What one scripted annotation run replies: the answer with markers around
/// `spans`, or a verbatim `raw` reply (for drift and garbage).
struct MockRunReply {
  SpanList spans;
  std::optional<std::string> raw;
};

struct MockItemScript {
  std::string answer;
  /// Indexed by run number modulo size; one entry means every run agrees.
  std::vector<MockRunReply> runs;
  std::optional<std::vector<std::string>> roles;
  std::optional<std::string> keyword;
  std::optional<std::string> knowledge;
};

/// Script for MockProvider.
///
/// JSON layout (all keys optional):
///   {"strict": true,
///    "exact": {"<sha256 of user prompt>": "reply"},
///    "defaults": {"roles": [...], "knowledge": "..."},
///    "items": {"<id>": {"answer": "...", "spans": [[s, e], ...],
///                       "runs": [{"spans": [[s, e]]} | {"raw": "..."}],
///                       "roles": [...], "keyword": "...", "knowledge": "..."}}}
struct MockScript {
  bool strict = true;
  std::map<std::string, std::string> exact;
  std::map<std::string, MockItemScript> items;
  std::optional<std::vector<std::string>> default_roles;
  std::optional<std::string> default_knowledge;

  static MockScript from_json(const nlohmann::json& doc);
  static MockScript load(const std::filesystem::path& path);

  /// Every item scripted to return `spans[id]` (unmarked when absent) in all runs.
  static MockScript unanimous(const std::vector<QAItem>& items,
                              const std::map<std::string, SpanList>& spans);
};

/// Deterministic provider for offline runs. Lookup order: exact prompt hash,
/// then a custom rule (if given), then per-item rules keyed by
/// CompletionRequest::item_id and purpose. Anything else raises MockError
/// in strict mode and returns an empty reply otherwise.
class MockProvider final : public LlmProvider {
 public:
  using Rule = std::function<std::optional<std::string>(const CompletionRequest&)>;

  explicit MockProvider(MockScript script = {});
  explicit MockProvider(Rule rule, bool strict = true);

  std::string complete(const CompletionRequest& req) override;

  std::size_t calls() const { return calls_.load(); }
  std::size_t calls(Purpose purpose) const;
  std::vector<CompletionRequest> requests() const;

  /// Hash used by the "exact" table.
  static std::string prompt_hash(const std::string& user_prompt);

 private:
  std::optional<std::string> scripted(const CompletionRequest& req) const;

  MockScript script_;
  Rule rule_;
  std::atomic<std::size_t> calls_{0};
  mutable std::mutex mutex_;
  std::vector<CompletionRequest> requests_;
};

/// Run number from a "run-<i>" seed tag; 0 when the tag has another shape.
std::size_t run_index(const std::string& seed_tag);

}  // namespace hallu
