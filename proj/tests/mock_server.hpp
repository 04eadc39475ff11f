#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lateralbench/dataset.hpp"
#include "lateralbench/llm/client.hpp"

namespace testutil {

inline std::string chat_content_body(const std::string& content) {
  nlohmann::json doc;
  doc["choices"] = nlohmann::json::array(
      {nlohmann::json{{"message", {{"role", "assistant"}, {"content", content}}}}});
  return doc.dump();
}

// In-process chat-completions endpoint. Each test installs a handler; the
// server tracks request counts, concurrency and protocol violations
// (anything other than exactly one user message).
class MockChatServer {
 public:
  // handler(request body json, per-prompt hit count) -> assistant content
  using Handler = std::function<std::string(const nlohmann::json&, int)>;

  MockChatServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const int in_flight = ++in_flight_;
      {
        std::lock_guard<std::mutex> lock(mu_);
        max_in_flight_ = std::max(max_in_flight_, in_flight);
      }
      ++total_requests_;

      const auto body = nlohmann::json::parse(req.body, nullptr, false);
      bool single_user_message =
          !body.is_discarded() && body.contains("messages") &&
          body["messages"].is_array() && body["messages"].size() == 1 &&
          body["messages"][0].value("role", "") == "user";
      if (!single_user_message) ++protocol_violations_;

      int status = 200;
      std::string content;
      {
        std::lock_guard<std::mutex> lock(mu_);
        if (fail_with_status_ != 0 &&
            total_requests_ > fail_after_requests_) {
          status = fail_with_status_;
        } else {
          const std::string prompt =
              single_user_message
                  ? body["messages"][0].value("content", std::string{})
                  : std::string{};
          const int hits = ++prompt_hits_[prompt];
          content = handler_ ? handler_(body, hits) : "{\"answer\": 1}";
        }
      }

      if (hold_ms_ > 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(hold_ms_));
      }
      if (status != 200) {
        res.status = status;
        res.set_content("induced failure", "text/plain");
      } else {
        res.set_content(chat_content_body(content), "application/json");
      }
      --in_flight_;
    });

    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockChatServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }

  void set_handler(Handler handler) {
    std::lock_guard<std::mutex> lock(mu_);
    handler_ = std::move(handler);
  }

  // Answers gold (1-based) for any instance in `instances`, keyed by the
  // prompt's question line.
  void answer_gold(const std::vector<lateral::PuzzleInstance>& instances) {
    std::map<std::string, int> gold;
    for (const auto& inst : instances) gold[inst.question] = inst.gold_index + 1;
    set_handler([gold](const nlohmann::json& body, int) {
      const std::string prompt = body["messages"][0].value("content", "");
      const std::string question = prompt.substr(0, prompt.find("\n\n"));
      auto it = gold.find(question);
      if (it == gold.end()) return std::string("no such question");
      return "{\"answer\": " + std::to_string(it->second) + "}";
    });
  }

  // Every request after the first `after` gets `status` back.
  void fail_after(int after, int status) {
    std::lock_guard<std::mutex> lock(mu_);
    fail_after_requests_ = after;
    fail_with_status_ = status;
  }

  void clear_failures() {
    std::lock_guard<std::mutex> lock(mu_);
    fail_with_status_ = 0;
    fail_after_requests_ = 0;
  }

  void set_hold_ms(int ms) { hold_ms_ = ms; }

  int total_requests() const { return total_requests_.load(); }
  int max_in_flight() const {
    std::lock_guard<std::mutex> lock(mu_);
    return max_in_flight_;
  }
  int protocol_violations() const { return protocol_violations_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  mutable std::mutex mu_;
  Handler handler_;
  std::map<std::string, int> prompt_hits_;
  std::atomic<int> total_requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> protocol_violations_{0};
  int max_in_flight_ = 0;
  int fail_after_requests_ = 0;
  int fail_with_status_ = 0;
  int hold_ms_ = 0;
};

// Scripted in-process ChatClient for tests that do not need HTTP.
class FakeChatClient : public lateral::llm::ChatClient {
 public:
  using Script = std::function<std::string(const lateral::llm::ChatRequest&, int)>;

  explicit FakeChatClient(Script script) : script_(std::move(script)) {}

  lateral::llm::ChatExchange complete(
      const lateral::llm::ChatRequest& request) override {
    int hits = 0;
    {
      std::lock_guard<std::mutex> lock(mu_);
      hits = ++prompt_hits_[request.user_message];
      ++total_requests_;
    }
    lateral::llm::ChatExchange exchange;
    exchange.content = script_(request, hits);
    exchange.request_body = "{}";
    exchange.response_body = chat_content_body(exchange.content);
    exchange.http_status = 200;
    return exchange;
  }

  int total_requests() const {
    std::lock_guard<std::mutex> lock(mu_);
    return total_requests_;
  }

 private:
  Script script_;
  mutable std::mutex mu_;
  std::map<std::string, int> prompt_hits_;
  int total_requests_ = 0;
};

// Answers gold for every instance; used by sweep and report tests.
inline FakeChatClient::Script gold_script(
    const std::vector<lateral::PuzzleInstance>& instances) {
  std::map<std::string, int> gold;
  for (const auto& inst : instances) gold[inst.question] = inst.gold_index + 1;
  return [gold](const lateral::llm::ChatRequest& req, int) {
    const std::string question =
        req.user_message.substr(0, req.user_message.find("\n\n"));
    auto it = gold.find(question);
    if (it == gold.end()) return std::string("unknown question");
    return "{\"answer\": " + std::to_string(it->second) + "}";
  };
}

}  // namespace testutil
