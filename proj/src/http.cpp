#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "hallu/http.hpp"

#include <fstream>

#include <json.hpp>

#include "hallu/error.hpp"

namespace hallu {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string target;  // /path?query
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("URL without scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers to_headers(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

HttpResponse convert(const httplib::Result& result) {
  HttpResponse out;
  if (!result) {
    out.error = httplib::to_string(result.error());
    return out;
  }
  out.status = result->status;
  out.body = result->body;
  return out;
}

}  // namespace

HttplibClient::HttplibClient() : HttplibClient(Timeouts{}) {}

HttplibClient::HttplibClient(Timeouts timeouts) : timeouts_(timeouts) {}

HttpResponse HttplibClient::get(const std::string& url, const HttpHeaders& headers) {
  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeouts_.connect_seconds, 0);
  client.set_read_timeout(timeouts_.read_seconds, 0);
  client.set_follow_location(true);
  return convert(client.Get(parts.target, to_headers(headers)));
}

HttpResponse HttplibClient::post(const std::string& url, const HttpHeaders& headers,
                                 const std::string& body) {
  const auto parts = split_url(url);
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeouts_.connect_seconds, 0);
  client.set_read_timeout(timeouts_.read_seconds, 0);
  auto content_type = headers.count("Content-Type") ? headers.at("Content-Type") : "application/json";
  auto hdrs = headers;
  hdrs.erase("Content-Type");
  return convert(client.Post(parts.target, to_headers(hdrs), body, content_type));
}

ReplayHttpClient::ReplayHttpClient(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw ConfigError("cannot open HTTP fixture " + fixture.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad HTTP fixture " + fixture.string() + ": " + e.what());
  }
  for (const auto& entry : doc.value("responses", nlohmann::json::array())) {
    HttpResponse r;
    r.status = entry.value("status", 200);
    const auto& body = entry.at("body");
    r.body = body.is_string() ? body.get<std::string>() : body.dump();
    add(entry.value("method", "GET"), entry.at("url").get<std::string>(), std::move(r));
  }
}

void ReplayHttpClient::add(std::string method, std::string url, HttpResponse response) {
  std::lock_guard lock(mutex_);
  responses_[{std::move(method), std::move(url)}] = std::move(response);
}

HttpResponse ReplayHttpClient::lookup(const std::string& method, const std::string& url) {
  ++calls_;
  std::lock_guard lock(mutex_);
  requested_.push_back(url);
  auto it = responses_.find({method, url});
  if (it == responses_.end()) return {0, "", "no recorded response for " + method + " " + url};
  return it->second;
}

HttpResponse ReplayHttpClient::get(const std::string& url, const HttpHeaders&) {
  return lookup("GET", url);
}

HttpResponse ReplayHttpClient::post(const std::string& url, const HttpHeaders&, const std::string&) {
  return lookup("POST", url);
}

std::vector<std::string> ReplayHttpClient::requested_urls() const {
  std::lock_guard lock(mutex_);
  return requested_;
}

HttpResponse RecordingHttpClient::get(const std::string& url, const HttpHeaders& headers) {
  auto r = inner_.get(url, headers);
  std::lock_guard lock(mutex_);
  exchanges_.push_back({"GET", url, r});
  return r;
}

HttpResponse RecordingHttpClient::post(const std::string& url, const HttpHeaders& headers,
                                       const std::string& body) {
  auto r = inner_.post(url, headers, body);
  std::lock_guard lock(mutex_);
  exchanges_.push_back({"POST", url, r});
  return r;
}

void RecordingHttpClient::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json doc;
  auto list = nlohmann::ordered_json::array();
  std::lock_guard lock(mutex_);
  for (const auto& e : exchanges_) {
    if (e.response.status == 0) continue;
    nlohmann::ordered_json entry;
    entry["method"] = e.method;
    entry["url"] = e.url;
    entry["status"] = e.response.status;
    auto parsed = nlohmann::ordered_json::parse(e.response.body, nullptr, false);
    entry["body"] = parsed.is_discarded() ? nlohmann::ordered_json(e.response.body) : parsed;
    list.push_back(std::move(entry));
  }
  doc["responses"] = std::move(list);
  std::ofstream out(path);
  out << doc.dump(2) << '\n';
}

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

}  // namespace hallu
