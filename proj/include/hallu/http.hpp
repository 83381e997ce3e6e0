#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace hallu {

using HttpHeaders = std::map<std::string, std::string>;

struct HttpResponse {
  int status = 0;  // 0 means the request never got a response
  std::string body;
  std::string error;
};

/// Minimal blocking HTTP transport. Implementations must be safe to call from
/// several threads at once.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  virtual HttpResponse get(const std::string& url, const HttpHeaders& headers) = 0;
  virtual HttpResponse post(const std::string& url, const HttpHeaders& headers,
                            const std::string& body) = 0;
};

/// HTTPS/HTTP client over cpp-httplib. One connection per request.
class HttplibClient final : public HttpClient {
 public:
  struct Timeouts {
    int connect_seconds = 10;
    int read_seconds = 180;
  };

  HttplibClient();
  explicit HttplibClient(Timeouts timeouts);

  HttpResponse get(const std::string& url, const HttpHeaders& headers) override;
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override;

 private:
  Timeouts timeouts_;
};

/// Serves responses from a recorded fixture file. Unrecorded requests get
/// status 0 and an error, which callers treat as a transport failure.
///
/// Fixture layout:
///   {"responses": [{"method": "GET", "url": "...", "status": 200,
///                   "body": <string or JSON value>}, ...]}
class ReplayHttpClient final : public HttpClient {
 public:
  ReplayHttpClient() = default;
  explicit ReplayHttpClient(const std::filesystem::path& fixture);

  void add(std::string method, std::string url, HttpResponse response);

  HttpResponse get(const std::string& url, const HttpHeaders& headers) override;
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override;

  std::size_t calls() const { return calls_.load(); }
  std::vector<std::string> requested_urls() const;

 private:
  HttpResponse lookup(const std::string& method, const std::string& url);

  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, HttpResponse> responses_;
  std::vector<std::string> requested_;
  std::atomic<std::size_t> calls_{0};
};

/// Forwards to another client and keeps every exchange so it can be saved
/// in the ReplayHttpClient fixture layout.
class RecordingHttpClient final : public HttpClient {
 public:
  explicit RecordingHttpClient(HttpClient& inner) : inner_(inner) {}

  HttpResponse get(const std::string& url, const HttpHeaders& headers) override;
  HttpResponse post(const std::string& url, const HttpHeaders& headers,
                    const std::string& body) override;

  void save(const std::filesystem::path& path) const;

 private:
  struct Exchange {
    std::string method;
    std::string url;
    HttpResponse response;
  };

  HttpClient& inner_;
  mutable std::mutex mutex_;
  std::vector<Exchange> exchanges_;
};

/// RFC 3986 percent-encoding of everything outside the unreserved set.
std::string percent_encode(std::string_view text);

}  // namespace hallu
