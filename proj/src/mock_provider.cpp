#include "hallu/mock_provider.hpp"

#include <charconv>
#include <fstream>

#include "hallu/error.hpp"
#include "hallu/hashing.hpp"
#include "hallu/markers.hpp"

namespace hallu {

using nlohmann::json;

namespace {

SpanList spans_from(const json& arr) {
  SpanList out;
  for (const auto& pair : arr) {
    out.push_back({pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>(), std::nullopt});
  }
  return out;
}

}  // namespace

std::size_t run_index(const std::string& seed_tag) {
  constexpr std::string_view prefix = "run-";
  if (seed_tag.rfind(prefix, 0) != 0) return 0;
  std::size_t value = 0;
  const auto* first = seed_tag.data() + prefix.size();
  const auto* last = seed_tag.data() + seed_tag.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return 0;
  return value;
}

MockScript MockScript::from_json(const json& doc) {
  MockScript s;
  try {
    s.strict = doc.value("strict", true);
    if (doc.contains("exact")) {
      for (const auto& [hash, reply] : doc["exact"].items()) s.exact[hash] = reply.get<std::string>();
    }
    if (doc.contains("defaults")) {
      const auto& d = doc["defaults"];
      if (d.contains("roles")) s.default_roles = d["roles"].get<std::vector<std::string>>();
      if (d.contains("knowledge")) s.default_knowledge = d["knowledge"].get<std::string>();
    }
    if (doc.contains("items")) {
      for (const auto& [id, entry] : doc["items"].items()) {
        MockItemScript item;
        item.answer = entry.value("answer", "");
        if (entry.contains("runs")) {
          for (const auto& run : entry["runs"]) {
            MockRunReply reply;
            if (run.contains("raw")) reply.raw = run["raw"].get<std::string>();
            if (run.contains("spans")) reply.spans = spans_from(run["spans"]);
            item.runs.push_back(std::move(reply));
          }
        } else {
          item.runs.push_back({entry.contains("spans") ? spans_from(entry["spans"]) : SpanList{}, std::nullopt});
        }
        if (entry.contains("roles")) item.roles = entry["roles"].get<std::vector<std::string>>();
        if (entry.contains("keyword")) item.keyword = entry["keyword"].get<std::string>();
        if (entry.contains("knowledge")) item.knowledge = entry["knowledge"].get<std::string>();
        s.items[id] = std::move(item);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad mock script: ") + e.what());
  }
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  const auto doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("mock script is not valid JSON: " + path.string());
  return from_json(doc);
}

MockScript MockScript::unanimous(const std::vector<QAItem>& items,
                                 const std::map<std::string, SpanList>& spans) {
  MockScript s;
  for (const auto& item : items) {
    MockItemScript entry;
    entry.answer = item.answer;
    auto it = spans.find(item.id);
    entry.runs.push_back({it == spans.end() ? SpanList{} : it->second, std::nullopt});
    s.items[item.id] = std::move(entry);
  }
  return s;
}

MockProvider::MockProvider(MockScript script) : script_(std::move(script)) {}

MockProvider::MockProvider(Rule rule, bool strict) : rule_(std::move(rule)) {
  script_.strict = strict;
}

std::string MockProvider::prompt_hash(const std::string& user_prompt) {
  return sha256_hex(user_prompt);
}

std::size_t MockProvider::calls(Purpose purpose) const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& r : requests_) n += r.purpose == purpose;
  return n;
}

std::vector<CompletionRequest> MockProvider::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::optional<std::string> MockProvider::scripted(const CompletionRequest& req) const {
  if (!script_.exact.empty()) {
    if (auto it = script_.exact.find(prompt_hash(req.user_prompt)); it != script_.exact.end()) {
      return it->second;
    }
  }
  if (rule_) {
    if (auto reply = rule_(req)) return reply;
  }

  const auto item_it = script_.items.find(req.item_id);
  const MockItemScript* item = item_it == script_.items.end() ? nullptr : &item_it->second;

  switch (req.purpose) {
    case Purpose::annotate: {
      if (!item || item->runs.empty()) return std::nullopt;
      if (req.user_prompt.find(item->answer) == std::string::npos) {
        throw MockError("answer of item " + req.item_id + " is not embedded in the prompt");
      }
      const auto& reply = item->runs[run_index(req.seed_tag) % item->runs.size()];
      if (reply.raw) return reply.raw;
      return "Marked answer: " + render_marked(item->answer, reply.spans);
    }
    case Purpose::roles: {
      const auto& roles = item && item->roles ? item->roles : script_.default_roles;
      if (!roles) return std::nullopt;
      return json{{"Identities", *roles}, {"Reason", "scripted"}}.dump();
    }
    case Purpose::keyword:
      if (!item || !item->keyword) return std::nullopt;
      return "Keyword: " + *item->keyword;
    case Purpose::summarize: {
      const auto& knowledge = item && item->knowledge ? item->knowledge : script_.default_knowledge;
      if (!knowledge) return std::nullopt;
      return json{{"Knowledge", *knowledge}, {"Reason", "scripted"}}.dump();
    }
    case Purpose::other:
      break;
  }
  return std::nullopt;
}

std::string MockProvider::complete(const CompletionRequest& req) {
  ++calls_;
  {
    std::lock_guard lock(mutex_);
    requests_.push_back(req);
  }
  if (auto reply = scripted(req)) return *reply;
  if (script_.strict) {
    throw MockError("unscripted prompt (item '" + req.item_id + "', seed '" + req.seed_tag + "')");
  }
  return {};
}

}  // namespace hallu
