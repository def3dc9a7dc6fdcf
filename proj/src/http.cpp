#include "revinsight/http.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "revinsight/errors.hpp"

namespace revinsight::http {

Url parse_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidArgument(fmt::format("URL '{}' has no scheme", url));
  }
  auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw InvalidArgument(fmt::format("URL '{}' must be http or https", url));
  }
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == scheme_end + 3) {
    throw InvalidArgument(fmt::format("URL '{}' has no host", url));
  }
  Url out;
  if (path_start == std::string::npos) {
    out.origin = url;
    out.path = "/";
  } else {
    out.origin = url.substr(0, path_start);
    out.path = url.substr(path_start);
  }
  return out;
}

std::chrono::milliseconds RetryPolicy::delay(int retry_index) const {
  double ms = static_cast<double>(initial_backoff.count()) *
              std::pow(multiplier, static_cast<double>(retry_index));
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds{static_cast<long long>(ms)};
}

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

Response post_json(const std::string& url, const std::string& body,
                   const RequestOptions& options) {
  auto target = parse_url(url);
  httplib::Client client(target.origin);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (options.bearer_token) {
    headers.emplace("Authorization", "Bearer " + *options.bearer_token);
  }

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(options.retry.delay(attempt - 1));

    auto res = client.Post(target.path, headers, body, "application/json");
    if (res) {
      last_status = res->status;
      if (res->status >= 200 && res->status < 300) {
        return Response{res->status, res->body, attempt};
      }
      last_error = fmt::format("HTTP {} from {}", res->status, url);
      if (!retryable(res->status)) throw RequestError(last_error, last_status, attempt);
    } else {
      last_status = 0;
      last_error = fmt::format("request to {} failed: {}", url, httplib::to_string(res.error()));
    }
    if (attempt >= options.retry.max_retries) {
      throw RequestError(fmt::format("{} (after {} retries)", last_error, attempt),
                         last_status, attempt);
    }
  }
}

std::optional<std::string> env_value(const std::string& name) {
  if (name.empty()) return std::nullopt;
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

}  // namespace revinsight::http
