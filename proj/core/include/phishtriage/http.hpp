#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace phishtriage {

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;
  std::string body;
  std::optional<std::chrono::milliseconds> retry_after;
};

/// Minimal HTTP surface used by the LLM and reputation clients. Transport-level
/// failures throw Error{TransportError} or Error{Timeout}; any HTTP status is
/// returned as a response.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;

  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers, std::chrono::milliseconds timeout) = 0;
  virtual HttpResponse get(const std::string& url, const HttpHeaders& headers,
                           std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport; http:// and https:// URLs. Reentrant: each
/// call opens its own connection.
class DefaultHttpTransport final : public HttpTransport {
 public:
  HttpResponse post(const std::string& url, const std::string& body, const HttpHeaders& headers,
                    std::chrono::milliseconds timeout) override;
  HttpResponse get(const std::string& url, const HttpHeaders& headers,
                   std::chrono::milliseconds timeout) override;
};

struct UrlParts {
  std::string origin;  ///< scheme://host[:port]
  std::string path;    ///< starts with '/', includes query
};

/// Throws Error{InvalidConfig} for URLs without http/https scheme.
UrlParts split_http_url(const std::string& url);

}  // namespace phishtriage
