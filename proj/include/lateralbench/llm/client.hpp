#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>

#include "lateralbench/error.hpp"
#include "lateralbench/rng.hpp"

namespace lateral::llm {

// One fresh session: exactly one user message, no history.
struct ChatRequest {
  std::string model_name;
  double temperature = 0.0;  // [0, 2] accepted; sweeps use [0, 1.2]
  int max_tokens = 256;
  std::chrono::milliseconds timeout{30000};
  std::string user_message;
};

struct ChatExchange {
  std::string content;        // assistant message content (what gets parsed)
  std::string request_body;   // raw JSON bodies, kept for audit transcripts
  std::string response_body;
  int http_status = 0;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;

  // Performs one complete exchange (transport retries included). Throws
  // Error with code transport_error (network failure or HTTP >= 500 after
  // retries), auth_error (401/403, non-retryable) or rate_limited (429 after
  // Retry-After backoff attempts are exhausted).
  virtual ChatExchange complete(const ChatRequest& request) = 0;
};

struct HttpClientConfig {
  std::string endpoint_url;  // full URL, e.g. http://host:8080/v1/chat/completions
  std::string api_key;       // resolved from an env var; never logged
  int max_transport_retries = 3;
  std::chrono::milliseconds backoff_base{250};
  std::chrono::milliseconds backoff_cap{8000};
  uint64_t jitter_seed = 0;  // backoff jitter is seedable for tests
};

// Chat-completions-compatible HTTP client. POSTs
// {model, temperature, max_tokens, messages:[{role:"user", content}]} and
// reads choices[0].message.content. Retries network errors and 5xx with
// exponential backoff + jitter; honors Retry-After on 429.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(HttpClientConfig config);
  ~HttpChatClient() override;

  ChatExchange complete(const ChatRequest& request) override;

  // Test hook: replaces real sleeping between retries.
  void set_sleep_fn(std::function<void(std::chrono::milliseconds)> fn);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Reads the API key from the named environment variable (empty result when
// unset). Keys never appear in config files or logs.
std::string api_key_from_env(const std::string& env_var);

}  // namespace lateral::llm
