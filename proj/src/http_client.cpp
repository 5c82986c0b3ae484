#include "dgp/http_client.hpp"

#include <algorithm>
#include <thread>

#include <httplib.h>

#include "dgp/error.hpp"

namespace dgp {

void call_with_retries(const std::function<void()>& attempt, const RetryPolicy& policy,
                       const std::string& what,
                       const std::function<void(std::chrono::milliseconds)>& sleep) {
  auto delay = policy.initial_backoff;
  for (int tries = 0;; ++tries) {
    try {
      attempt();
      return;
    } catch (const std::exception& e) {
      if (tries >= policy.max_retries) {
        throw BackendError(what + ": all " + std::to_string(policy.max_retries) +
                           " retries failed; last error: " + e.what());
      }
    }
    if (sleep) {
      sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
    delay = std::min(delay * 2, policy.max_backoff);
  }
}

HttpJsonClient::HttpJsonClient(std::string endpoint, std::chrono::milliseconds timeout,
                               RetryPolicy retry)
    : endpoint_(std::move(endpoint)), timeout_(timeout), retry_(retry) {
  const auto scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("endpoint '" + endpoint_ + "' must start with http:// or https://");
  }
  const auto path_start = endpoint_.find('/', scheme_end + 3);
  host_ = endpoint_.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : endpoint_.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

HttpJsonClient::~HttpJsonClient() = default;

json HttpJsonClient::post(const std::string& path, const json& body,
                          const std::function<void(const json&)>& check) const {
  const std::string payload = body.dump();
  const std::string full_path = base_path_ + path;
  json result;
  call_with_retries(
      [&] {
        httplib::Client client(host_);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        const auto res = client.Post(full_path, payload, "application/json");
        if (!res) throw std::runtime_error("transport error: " + httplib::to_string(res.error()));
        if (res->status != 200) throw std::runtime_error("HTTP status " + std::to_string(res->status));
        result = json::parse(res->body);
        if (check) check(result);
      },
      retry_, "POST " + host_ + full_path);
  return result;
}

}  // namespace dgp
