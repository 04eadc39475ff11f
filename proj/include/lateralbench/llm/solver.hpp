#pragma once

#include <chrono>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lateralbench/dataset.hpp"
#include "lateralbench/llm/client.hpp"
#include "lateralbench/llm/prompt.hpp"

namespace lateral::llm {

struct SolverOptions {
  std::string solver_id = "llm";
  std::string model_name = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 256;
  int retry_budget = 3;          // parse-failure attempts per instance
  int concurrency = 1;           // max in-flight requests
  int requests_per_minute = 0;   // 0 = uncapped
  std::chrono::milliseconds timeout{30000};
  PromptTemplate prompt;
  std::string transcript_path;   // JSON-lines audit log; empty = off

  void check() const;  // throws bad_config
};

// Sliding-window per-minute request cap, shared across workers. Clock and
// sleep are injectable so tests stay fast.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(int requests_per_minute);

  void set_clock(std::function<Clock::time_point()> now_fn,
                 std::function<void(std::chrono::milliseconds)> sleep_fn);

  // Blocks until a slot is free, then records the request.
  void acquire();

 private:
  int limit_;
  std::mutex mu_;
  std::deque<Clock::time_point> timestamps_;
  std::function<Clock::time_point()> now_fn_;
  std::function<void(std::chrono::milliseconds)> sleep_fn_;
};

// Solves one instance: a fresh single-message session per attempt, identical
// prompt on parse-failure retries, ABSTAIN after the budget is exhausted.
// The raw final response is always recorded. Transport/auth/rate-limit
// errors propagate as Error.
PredictionRecord solve_instance(ChatClient& client,
                                const PuzzleInstance& instance,
                                const SolverOptions& options,
                                RateLimiter* limiter = nullptr,
                                std::function<void(const std::string&)>
                                    transcript_sink = nullptr);

// Solves every instance, preserving input order in the result regardless of
// completion order. At most options.concurrency requests are in flight and
// the per-minute cap is honored. Per-instance transport failures become
// ABSTAIN records; only auth_error aborts the run. on_record (serialized,
// completion order) lets callers flush partial progress.
std::vector<PredictionRecord> solve_dataset(
    ChatClient& client, const std::vector<PuzzleInstance>& instances,
    const SolverOptions& options,
    std::function<void(size_t, const PredictionRecord&)> on_record = nullptr);

}  // namespace lateral::llm
