#include "hallu/knowledge.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "hallu/error.hpp"
#include "hallu/utf8.hpp"

namespace hallu {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return std::string(s.substr(first, last - first + 1));
}

std::string truncate_chars(const std::string& text, std::size_t max_chars) {
  if (utf8::length(text) <= max_chars) return text;
  return utf8::slice(text, 0, max_chars);
}

// End of the brace-balanced object starting at `open`, or npos.
std::size_t object_end(const std::string& s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return i;
    }
  }
  return std::string::npos;
}

std::optional<std::string> first_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_object()) {
    for (const auto& [k, inner] : v.items()) {
      if (inner.is_string()) return inner.get<std::string>();
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<json> find_json_object(const std::string& reply) {
  for (auto open = reply.find('{'); open != std::string::npos; open = reply.find('{', open + 1)) {
    const auto close = object_end(reply, open);
    if (close == std::string::npos) continue;
    auto doc = json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (!doc.is_discarded() && doc.is_object()) return doc;
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> parse_roles_reply(const std::string& reply,
                                                          std::size_t max_roles) {
  const auto doc = find_json_object(reply);
  if (!doc || !doc->contains("Identities")) return std::nullopt;
  const auto& ids = (*doc)["Identities"];
  std::vector<std::string> raw;
  if (ids.is_array()) {
    for (const auto& v : ids) {
      if (auto s = first_string(v)) raw.push_back(*s);
    }
  } else if (auto s = first_string(ids)) {
    raw.push_back(*s);
  }
  std::vector<std::string> roles;
  std::set<std::string> seen;
  for (auto& r : raw) {
    auto t = trim(r);
    if (t.empty() || !seen.insert(t).second) continue;
    roles.push_back(std::move(t));
    if (roles.size() == max_roles) break;
  }
  if (roles.empty()) return std::nullopt;
  return roles;
}

std::optional<std::string> parse_keyword_reply(const std::string& reply) {
  constexpr std::string_view label = "Keyword:";
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.find(label);
    if (pos == std::string::npos) continue;
    auto keyword = trim(std::string_view(line).substr(pos + label.size()));
    if (keyword.empty()) return std::nullopt;
    return keyword;
  }
  return std::nullopt;
}

std::optional<std::string> parse_summary_reply(const std::string& reply) {
  const auto doc = find_json_object(reply);
  if (!doc || !doc->contains("Knowledge")) return std::nullopt;
  const auto& k = (*doc)["Knowledge"];
  std::string text;
  if (k.is_string()) {
    text = k.get<std::string>();
  } else if (k.is_array()) {
    for (const auto& part : k) {
      if (!part.is_string()) continue;
      if (!text.empty()) text.push_back(' ');
      text += part.get<std::string>();
    }
  }
  text = trim(text);
  if (text.empty()) return std::nullopt;
  return text;
}

// ---- Wikipedia --------------------------------------------------------------

WikipediaClient::WikipediaClient(HttpClient& http, WikipediaOptions options, Clock& clock)
    : http_(http), options_(std::move(options)), clock_(clock) {}

std::string WikipediaClient::search_url(const std::string& wiki, const std::string& keyword) {
  return "https://" + wiki +
         ".wikipedia.org/w/api.php?action=query&list=search&format=json&formatversion=2"
         "&srlimit=1&srsearch=" +
         percent_encode(keyword);
}

std::string WikipediaClient::extract_url(const std::string& wiki, const std::string& title) {
  return "https://" + wiki +
         ".wikipedia.org/w/api.php?action=query&prop=extracts&explaintext=1&redirects=1"
         "&format=json&formatversion=2&titles=" +
         percent_encode(title);
}

std::string WikipediaClient::page_url(const std::string& wiki, const std::string& title) {
  auto t = title;
  std::replace(t.begin(), t.end(), ' ', '_');
  return "https://" + wiki + ".wikipedia.org/wiki/" + percent_encode(t);
}

json WikipediaClient::get_json(const std::string& url) {
  const HttpHeaders headers{{"User-Agent", options_.user_agent}};
  auto backoff = std::chrono::duration_cast<Clock::duration>(options_.backoff);
  for (int attempt = 0;; ++attempt) {
    ++calls_;
    const auto resp = http_.get(url, headers);
    if (resp.status == 200) {
      auto doc = json::parse(resp.body, nullptr, false);
      if (doc.is_discarded()) throw KnowledgeError("Wikipedia returned invalid JSON for " + url);
      return doc;
    }
    const bool transient = resp.status == 0 || resp.status == 429 || resp.status >= 500;
    if (!transient) throw KnowledgeError("Wikipedia HTTP " + std::to_string(resp.status) + " for " + url);
    if (attempt >= options_.max_retries) {
      throw KnowledgeError("Wikipedia unreachable after " + std::to_string(attempt + 1) +
                           " attempts: " + (resp.error.empty() ? "HTTP " + std::to_string(resp.status) : resp.error));
    }
    clock_.sleep_for(backoff);
    backoff *= 2;
  }
}

std::optional<std::string> WikipediaClient::search(const std::string& wiki,
                                                   const std::string& keyword) {
  const auto doc = get_json(search_url(wiki, keyword));
  const auto* hits = doc.contains("query") ? &doc["query"] : nullptr;
  if (!hits || !hits->contains("search") || !(*hits)["search"].is_array() ||
      (*hits)["search"].empty()) {
    return std::nullopt;
  }
  const auto& first = (*hits)["search"][0];
  if (!first.contains("title") || !first["title"].is_string()) return std::nullopt;
  return first["title"].get<std::string>();
}

std::string WikipediaClient::extract(const std::string& wiki, const std::string& title) {
  const auto doc = get_json(extract_url(wiki, title));
  try {
    const auto& pages = doc.at("query").at("pages");
    const auto& page = pages.is_array() ? pages.at(0) : pages.begin().value();
    const auto text = page.at("extract").get<std::string>();
    if (trim(text).empty()) throw KnowledgeError("empty extract for " + title);
    return text;
  } catch (const json::exception&) {
    throw KnowledgeError("no extract for " + title);
  }
}

WikiPage WikipediaClient::fetch(const std::string& keyword, const std::string& lang) {
  if (trim(keyword).empty()) throw KnowledgeError("empty Wikipedia keyword");
  auto wiki = wiki_code(lang);
  auto hit = search(wiki, keyword);
  if (!hit && wiki != "en") {
    wiki = "en";
    hit = search(wiki, keyword);
  }
  if (!hit) throw KnowledgeError("no Wikipedia results for '" + keyword + "'");
  WikiPage page;
  page.title = *hit;
  page.wiki = wiki;
  page.url = page_url(wiki, *hit);
  page.text = truncate_chars(extract(wiki, *hit), options_.max_chars);
  return page;
}

// ---- knowledge chain ----------------------------------------------------------

KnowledgeService::KnowledgeService(LlmGateway& llm, WikipediaClient* wiki, const PromptSet& prompts,
                                   KnowledgeOptions options, LogSink log)
    : llm_(llm), wiki_(wiki), prompts_(prompts), options_(std::move(options)), log_(std::move(log)) {
  if (!log_) log_ = [](const std::string&) {};
}

CompletionRequest KnowledgeService::request(const QAItem& item, Purpose purpose, std::string prompt,
                                            std::string seed_tag) const {
  CompletionRequest req;
  req.model = options_.model;
  req.user_prompt = std::move(prompt);
  req.temperature = 0.0;
  req.max_tokens = options_.max_tokens;
  req.seed_tag = std::move(seed_tag);
  req.purpose = purpose;
  req.item_id = item.id;
  return req;
}

std::vector<std::string> KnowledgeService::assign_roles(const QAItem& item) {
  const auto prompt = prompts_.roles.render({{"lang", language_name(item.lang)},
                                             {"question", item.question},
                                             {"answer", item.answer}});
  const auto key = ResponseCache::make_key(
      "roles", {{"item", item.id}, {"model", options_.model}, {"prompt", prompt},
                {"max_roles", options_.max_roles}});
  if (auto hit = llm_.cache().get(key)) return hit->get<std::vector<std::string>>();

  for (int attempt = 0; attempt < options_.attempts; ++attempt) {
    try {
      const auto reply =
          llm_.complete(request(item, Purpose::roles, prompt, "roles-" + std::to_string(attempt)));
      if (auto roles = parse_roles_reply(reply, options_.max_roles)) {
        return llm_.cache().put_if_absent(key, "roles", json(*roles)).get<std::vector<std::string>>();
      }
    } catch (const AuthError&) {
      throw;
    } catch (const Error& e) {
      log_(item.id + ": role assignment attempt failed: " + e.what());
    }
  }
  log_(item.id + ": role assignment degraded to the fallback role");
  return {options_.fallback_role};
}

std::string KnowledgeService::extract_keyword(const QAItem& item) {
  const auto prompt = prompts_.keyword.render({{"question", item.question}});
  const auto key = ResponseCache::make_key(
      "keyword", {{"item", item.id}, {"model", options_.model}, {"prompt", prompt}});
  if (auto hit = llm_.cache().get(key)) return hit->get<std::string>();

  const auto reply = llm_.complete(request(item, Purpose::keyword, prompt, "keyword-0"));
  auto keyword = parse_keyword_reply(reply);
  if (!keyword) throw KnowledgeError("no 'Keyword:' line in reply for item " + item.id);
  return llm_.cache().put_if_absent(key, "keyword", json(*keyword)).get<std::string>();
}

WikiPage KnowledgeService::fetch_wikipedia(const QAItem& item, const std::string& keyword) {
  if (!wiki_) throw KnowledgeError("no Wikipedia client configured");
  const auto key = ResponseCache::make_key(
      "wikipedia", {{"item", item.id},
                    {"keyword", keyword},
                    {"wiki", wiki_code(item.lang)},
                    {"max_chars", wiki_->options().max_chars}});
  if (auto hit = llm_.cache().get(key)) {
    return {hit->at("title"), hit->at("url"), hit->at("wiki"), hit->at("text")};
  }
  const auto page = wiki_->fetch(keyword, item.lang);
  llm_.cache().put_if_absent(
      key, "wikipedia", {{"title", page.title}, {"url", page.url}, {"wiki", page.wiki}, {"text", page.text}});
  return page;
}

std::string KnowledgeService::summarize_knowledge(const QAItem& item, const std::string& raw,
                                                  const std::string& wiki_lang) {
  const auto prompt = prompts_.summarize.render({{"lang", language_name(wiki_lang)},
                                                 {"question", item.question},
                                                 {"answer", item.answer},
                                                 {"knowledge", raw}});
  const auto key = ResponseCache::make_key(
      "summarize", {{"item", item.id}, {"model", options_.model}, {"prompt", prompt}});
  if (auto hit = llm_.cache().get(key)) return hit->get<std::string>();

  for (int attempt = 0; attempt < options_.attempts; ++attempt) {
    try {
      const auto reply = llm_.complete(
          request(item, Purpose::summarize, prompt, "summarize-" + std::to_string(attempt)));
      if (auto text = parse_summary_reply(reply)) {
        return llm_.cache().put_if_absent(key, "summarize", json(*text)).get<std::string>();
      }
    } catch (const AuthError&) {
      throw;
    } catch (const Error& e) {
      log_(item.id + ": summarization attempt failed: " + e.what());
    }
  }
  log_(item.id + ": summarization degraded to truncated raw knowledge");
  return truncate_chars(raw, options_.fallback_chars);
}

KnowledgeBundle KnowledgeService::build_bundle(const QAItem& item, bool use_roles, bool use_external) {
  KnowledgeBundle bundle;
  if (use_roles) bundle.roles = assign_roles(item);
  if (!use_external) return bundle;
  try {
    bundle.keyword = extract_keyword(item);
    const auto page = fetch_wikipedia(item, bundle.keyword);
    bundle.raw_external = page.text;
    bundle.provenance = page.url;
    bundle.refined_external = summarize_knowledge(item, page.text, page.wiki);
  } catch (const AuthError&) {
    throw;
  } catch (const Error& e) {
    log_(item.id + ": external knowledge skipped: " + e.what());
  }
  return bundle;
}

}  // namespace hallu
