#include "phishtriage/http.hpp"

#include <httplib.h>

#include "phishtriage/error.hpp"

namespace phishtriage {
namespace {

using Clock = std::chrono::steady_clock;

httplib::Headers to_httplib(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

std::optional<std::chrono::milliseconds> parse_retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  try {
    const double seconds = std::stod(res.get_header_value("Retry-After"));
    if (seconds < 0) return std::nullopt;
    return std::chrono::milliseconds(static_cast<long long>(seconds * 1000));
  } catch (const std::exception&) {
    return std::nullopt;  // HTTP-date form is not honored
  }
}

template <typename Call>
HttpResponse perform(const std::string& url, std::chrono::milliseconds timeout, Call&& call) {
  const UrlParts parts = split_http_url(url);
  httplib::Client client(parts.origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_keep_alive(false);

  const auto started = Clock::now();
  httplib::Result res = call(client, parts.path);
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                            Clock::now() - started >= timeout * 9 / 10);
    if (timed_out) throw Error(ErrorCode::Timeout, "request to " + parts.origin + " timed out");
    throw Error(ErrorCode::TransportError, "request to " + parts.origin + " failed: " + httplib::to_string(err));
  }
  return HttpResponse{res->status, res->body, parse_retry_after(*res)};
}

}  // namespace

UrlParts split_http_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::InvalidConfig, "not an http(s) URL: " + url);
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw Error(ErrorCode::InvalidConfig, "unsupported scheme in " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  UrlParts parts;
  parts.origin = url.substr(0, path_start);
  parts.path = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (parts.origin.size() <= scheme_end + 3) throw Error(ErrorCode::InvalidConfig, "missing host in " + url);
  return parts;
}

HttpResponse DefaultHttpTransport::post(const std::string& url, const std::string& body,
                                        const HttpHeaders& headers, std::chrono::milliseconds timeout) {
  return perform(url, timeout, [&](httplib::Client& client, const std::string& path) {
    return client.Post(path, to_httplib(headers), body, "application/json");
  });
}

HttpResponse DefaultHttpTransport::get(const std::string& url, const HttpHeaders& headers,
                                       std::chrono::milliseconds timeout) {
  return perform(url, timeout, [&](httplib::Client& client, const std::string& path) {
    return client.Get(path, to_httplib(headers));
  });
}

}  // namespace phishtriage
