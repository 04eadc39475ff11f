#include "lateralbench/llm/client.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace lateral::llm {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(errc::bad_config, "endpoint URL needs a scheme: " + url);
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

std::string api_key_from_env(const std::string& env_var) {
  const char* value = std::getenv(env_var.c_str());
  return value ? value : "";
}

struct HttpChatClient::Impl {
  HttpClientConfig config;
  ParsedUrl url;
  std::mutex jitter_mu;
  Rng jitter;
  std::function<void(std::chrono::milliseconds)> sleep_fn;

  explicit Impl(HttpClientConfig cfg)
      : config(std::move(cfg)),
        url(split_url(config.endpoint_url)),
        jitter(derive_seed(config.jitter_seed, 7)),
        sleep_fn([](std::chrono::milliseconds d) {
          std::this_thread::sleep_for(d);
        }) {}

  std::chrono::milliseconds backoff_delay(int attempt) {
    auto cap = config.backoff_cap.count();
    auto base = config.backoff_base.count();
    long long window = base << std::min(attempt, 20);
    window = std::min<long long>(window, cap);
    std::lock_guard<std::mutex> lock(jitter_mu);
    // Full jitter keeps concurrent retries from synchronizing.
    const auto delay = static_cast<long long>(jitter.uniform() * window);
    return std::chrono::milliseconds(delay);
  }
};

HttpChatClient::HttpChatClient(HttpClientConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpChatClient::~HttpChatClient() = default;

void HttpChatClient::set_sleep_fn(
    std::function<void(std::chrono::milliseconds)> fn) {
  impl_->sleep_fn = std::move(fn);
}

ChatExchange HttpChatClient::complete(const ChatRequest& request) {
  json body;
  body["model"] = request.model_name;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  // Exactly one user message and no history: each question is a fresh
  // session.
  body["messages"] = json::array(
      {json{{"role", "user"}, {"content", request.user_message}}});
  const std::string request_body = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= impl_->config.max_transport_retries;
       ++attempt) {
    if (attempt > 0) impl_->sleep_fn(impl_->backoff_delay(attempt - 1));

    // One client per exchange: no connection reuse across sessions, and
    // complete() stays safe to call concurrently.
    httplib::Client http(impl_->url.base);
    const auto secs =
        std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    http.set_connection_timeout(secs.count(), 0);
    http.set_read_timeout(secs.count(), 0);
    httplib::Headers headers;
    if (!impl_->config.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + impl_->config.api_key);
    }

    auto res = http.Post(impl_->url.path, headers, request_body,
                         "application/json");
    if (!res) {
      last_error = "network failure (" + httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw Error(errc::auth_error, "endpoint rejected credentials (HTTP " +
                                        std::to_string(res->status) + ")");
    }
    if (res->status == 429) {
      long long wait_ms = impl_->backoff_delay(attempt).count();
      if (auto it = res->headers.find("Retry-After"); it != res->headers.end()) {
        char* end = nullptr;
        const double secs_after = std::strtod(it->second.c_str(), &end);
        if (end != it->second.c_str() && secs_after >= 0) {
          wait_ms = static_cast<long long>(secs_after * 1000.0);
        }
      }
      if (attempt == impl_->config.max_transport_retries) {
        throw Error(errc::rate_limited,
                    "still rate-limited after " + std::to_string(attempt + 1) +
                        " attempts");
      }
      impl_->sleep_fn(std::chrono::milliseconds(wait_ms));
      last_error = "HTTP 429";
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(errc::transport_error,
                  "unexpected HTTP " + std::to_string(res->status) + ": " +
                      res->body);
    }

    const auto doc = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.contains("choices") ||
        !doc["choices"].is_array() || doc["choices"].empty()) {
      last_error = "malformed chat-completions envelope";
      continue;
    }
    const auto& first = doc["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
      last_error = "chat-completions response lacks message content";
      continue;
    }

    ChatExchange exchange;
    exchange.content = first["message"]["content"].get<std::string>();
    exchange.request_body = request_body;
    exchange.response_body = res->body;
    exchange.http_status = res->status;
    return exchange;
  }
  throw Error(errc::transport_error,
              "gave up after " +
                  std::to_string(impl_->config.max_transport_retries + 1) +
                  " attempts: " + last_error);
}

}  // namespace lateral::llm
