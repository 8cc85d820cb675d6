#pragma once

#include <chrono>
#include <memory>
#include <string>

#include <json.hpp>

namespace xlt {

struct RetryPolicy {
  /// Extra attempts after the first one, for transport failures only.
  int retries = 2;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::seconds timeout{60};
};

/// JSON-over-HTTP/1.1 client for the backend wire protocols.
///
/// Transport failures (no connection, timeout, 502/503/504) are retried
/// with exponential backoff and finally raise BackendUnreachable. A reply
/// carrying {"error": {"code", "message", "index"}} raises BackendFailure
/// immediately, with the index when one is given.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(std::string base_url, RetryPolicy policy = {});
  ~JsonHttpClient();
  JsonHttpClient(JsonHttpClient&&) noexcept;
  JsonHttpClient& operator=(JsonHttpClient&&) noexcept;

  nlohmann::json get(const std::string& path) const;
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  const std::string& base_url() const { return base_url_; }

 private:
  struct Impl;
  std::string base_url_;
  RetryPolicy policy_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xlt
