#include "xlt/util/http_json.hpp"

#include <thread>

#include <httplib.h>

#include "xlt/error.hpp"

namespace xlt {

// One httplib::Client per exchange so concurrent callers never share a socket.
struct JsonHttpClient::Impl {
  Impl(std::string url, const RetryPolicy& policy) : url(std::move(url)), policy(policy) {}

  std::unique_ptr<httplib::Client> connect() const {
    auto client = std::make_unique<httplib::Client>(url);
    client->set_connection_timeout(policy.timeout);
    client->set_read_timeout(policy.timeout);
    client->set_write_timeout(policy.timeout);
    return client;
  }

  std::string url;
  RetryPolicy policy;
};

JsonHttpClient::JsonHttpClient(std::string base_url, RetryPolicy policy)
    : base_url_(std::move(base_url)), policy_(policy) {
  impl_ = std::make_unique<Impl>(base_url_, policy_);
  if (!httplib::Client(base_url_).is_valid()) {
    fail(ErrorCode::ConfigInvalid, "invalid backend URL '" + base_url_ + "'");
  }
}

JsonHttpClient::~JsonHttpClient() = default;
JsonHttpClient::JsonHttpClient(JsonHttpClient&&) noexcept = default;
JsonHttpClient& JsonHttpClient::operator=(JsonHttpClient&&) noexcept = default;

namespace {

bool is_transport_status(int status) {
  return status == 502 || status == 503 || status == 504;
}

[[noreturn]] void raise_model_error(const httplib::Response& res, const std::string& what) {
  nlohmann::json body = nlohmann::json::parse(res.body, nullptr, false);
  if (body.is_object() && body.contains("error") && body["error"].is_object()) {
    const auto& err = body["error"];
    std::string message = err.value("code", std::string("error")) + ": " +
                          err.value("message", std::string());
    if (err.contains("index") && err["index"].is_number_unsigned()) {
      fail(ErrorCode::BackendFailure, what + ": " + message, err["index"].get<std::size_t>());
    }
    fail(ErrorCode::BackendFailure, what + ": " + message);
  }
  fail(ErrorCode::BackendFailure, what + ": HTTP " + std::to_string(res.status));
}

}  // namespace

namespace {

template <class Send>
nlohmann::json exchange(const RetryPolicy& policy, const std::string& what, Send&& send) {
  auto backoff = policy.initial_backoff;
  std::string last;
  for (int attempt = 0; attempt <= policy.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Result res = send();
    if (!res) {
      last = httplib::to_string(res.error());
      continue;
    }
    if (is_transport_status(res->status)) {
      last = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) raise_model_error(*res, what);
    auto body = nlohmann::json::parse(res->body, nullptr, false);
    if (body.is_discarded()) fail(ErrorCode::BackendFailure, what + ": reply is not JSON");
    if (body.is_object() && body.contains("error")) raise_model_error(*res, what);
    return body;
  }
  fail(ErrorCode::BackendUnreachable, what + ": " + last);
}

}  // namespace

nlohmann::json JsonHttpClient::get(const std::string& path) const {
  return exchange(policy_, "GET " + base_url_ + path, [&] {
    return impl_->connect()->Get(path);
  });
}

nlohmann::json JsonHttpClient::post(const std::string& path, const nlohmann::json& body) const {
  const std::string payload = body.dump();
  return exchange(policy_, "POST " + base_url_ + path, [&] {
    return impl_->connect()->Post(path, payload, "application/json");
  });
}

}  // namespace xlt
