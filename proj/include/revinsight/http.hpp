#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

namespace revinsight::http {

/// "http[s]://host[:port]/path" split into the origin httplib connects to and
/// the request path.
struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

/// Throws InvalidArgument on anything other than an absolute http(s) URL.
Url parse_url(const std::string& url);

/// Exponential backoff: attempt k (0-based retry index) waits
/// min(initial_backoff * multiplier^k, max_backoff).
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds delay(int retry_index) const;
};

struct RequestOptions {
  std::chrono::milliseconds timeout{std::chrono::seconds{120}};
  std::optional<std::string> bearer_token;
  RetryPolicy retry;
};

struct Response {
  int status = 0;
  std::string body;
  int retries = 0;  // attempts beyond the first
};

/// Raised once retries are exhausted or on a non-retryable status.
/// `status` is 0 for transport-level failures (refused, timeout, ...).
class RequestError : public std::runtime_error {
 public:
  RequestError(const std::string& what, int status, int retries)
      : std::runtime_error(what), status_(status), retries_(retries) {}

  int status() const noexcept { return status_; }
  int retries() const noexcept { return retries_; }

 private:
  int status_;
  int retries_;
};

/// POSTs a JSON body. Transport failures, 429 and 5xx are retried per the
/// policy; other non-2xx statuses fail immediately.
Response post_json(const std::string& url, const std::string& body,
                   const RequestOptions& options);

/// Value of the named environment variable; nullopt when the name is empty or
/// the variable is unset.
std::optional<std::string> env_value(const std::string& name);

}  // namespace revinsight::http
