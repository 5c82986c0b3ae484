#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>

#include "dgp/io.hpp"

namespace dgp {

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::chrono::milliseconds max_backoff{5'000};
};

// Calls `attempt` until it succeeds or max_retries retries have failed,
// sleeping initial_backoff * 2^i between attempts. The last failure is
// rethrown as BackendError.
void call_with_retries(const std::function<void()>& attempt, const RetryPolicy& policy,
                       const std::string& what,
                       const std::function<void(std::chrono::milliseconds)>& sleep = {});

// POSTs JSON bodies to `{endpoint}{path}`. Any transport error, non-200
// status, unparseable body or exception from `check` counts as a failed
// attempt.
class HttpJsonClient {
 public:
  HttpJsonClient(std::string endpoint, std::chrono::milliseconds timeout, RetryPolicy retry);
  ~HttpJsonClient();

  HttpJsonClient(const HttpJsonClient&) = delete;
  HttpJsonClient& operator=(const HttpJsonClient&) = delete;

  const std::string& endpoint() const { return endpoint_; }
  json post(const std::string& path, const json& body,
            const std::function<void(const json&)>& check = {}) const;

 private:
  std::string endpoint_;
  std::string host_;       // scheme://host:port
  std::string base_path_;  // path prefix, no trailing slash
  std::chrono::milliseconds timeout_;
  RetryPolicy retry_;
};

}  // namespace dgp
