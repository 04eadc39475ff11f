#include "lateralbench/llm/solver.hpp"

#include <atomic>
#include <thread>

#include <nlohmann/json.hpp>

#include "lateralbench/io.hpp"

namespace lateral::llm {

void SolverOptions::check() const {
  if (temperature < 0.0 || temperature > 2.0) {
    throw Error(errc::bad_config, "temperature must lie in [0, 2]");
  }
  if (retry_budget < 1 || concurrency < 1 || requests_per_minute < 0 ||
      max_tokens < 1) {
    throw Error(errc::bad_config,
                "retry_budget/concurrency/max_tokens must be >= 1");
  }
}

RateLimiter::RateLimiter(int requests_per_minute)
    : limit_(requests_per_minute),
      now_fn_([] { return Clock::now(); }),
      sleep_fn_([](std::chrono::milliseconds d) {
        std::this_thread::sleep_for(d);
      }) {}

void RateLimiter::set_clock(
    std::function<Clock::time_point()> now_fn,
    std::function<void(std::chrono::milliseconds)> sleep_fn) {
  now_fn_ = std::move(now_fn);
  sleep_fn_ = std::move(sleep_fn);
}

void RateLimiter::acquire() {
  if (limit_ <= 0) return;  // uncapped
  constexpr auto kWindow = std::chrono::seconds(60);
  for (;;) {
    std::chrono::milliseconds wait{0};
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto now = now_fn_();
      while (!timestamps_.empty() && now - timestamps_.front() >= kWindow) {
        timestamps_.pop_front();
      }
      if (static_cast<int>(timestamps_.size()) < limit_) {
        timestamps_.push_back(now);
        return;
      }
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(
                 kWindow - (now - timestamps_.front())) +
             std::chrono::milliseconds(1);
    }
    sleep_fn_(wait);
  }
}

PredictionRecord solve_instance(ChatClient& client,
                                const PuzzleInstance& instance,
                                const SolverOptions& options,
                                RateLimiter* limiter,
                                std::function<void(const std::string&)>
                                    transcript_sink) {
  options.check();
  const std::string prompt = options.prompt.render(instance);
  const int n_choices = static_cast<int>(instance.choices.size());

  PredictionRecord record;
  record.instance_id = instance.id;
  record.solver_id = options.solver_id;
  record.temperature = options.temperature;

  for (int attempt = 1; attempt <= options.retry_budget; ++attempt) {
    if (limiter) limiter->acquire();

    ChatRequest request;
    request.model_name = options.model_name;
    request.temperature = options.temperature;
    request.max_tokens = options.max_tokens;
    request.timeout = options.timeout;
    request.user_message = prompt;  // identical prompt on every retry

    const ChatExchange exchange = client.complete(request);
    record.raw_response = exchange.content;
    record.attempts = attempt;

    if (transcript_sink) {
      nlohmann::ordered_json line;
      line["instance_id"] = instance.id;
      line["attempt"] = attempt;
      line["request"] = exchange.request_body;
      line["response"] = exchange.response_body;
      transcript_sink(line.dump());
    }

    const AnswerParse parsed = parse_answer(exchange.content, n_choices);
    if (parsed.status == ParseStatus::ok) {
      record.predicted_index = parsed.choice_index;
      return record;
    }
  }
  // Budget exhausted without a usable answer: ABSTAIN, raw final response
  // kept.
  return record;
}

std::vector<PredictionRecord> solve_dataset(
    ChatClient& client, const std::vector<PuzzleInstance>& instances,
    const SolverOptions& options,
    std::function<void(size_t, const PredictionRecord&)> on_record) {
  options.check();
  const size_t n = instances.size();
  std::vector<PredictionRecord> records(n);

  RateLimiter limiter(options.requests_per_minute);
  std::mutex sink_mu;
  std::function<void(const std::string&)> transcript_sink;
  std::string transcript;
  if (!options.transcript_path.empty()) {
    transcript_sink = [&](const std::string& line) {
      std::lock_guard<std::mutex> lock(sink_mu);
      transcript += line;
      transcript += '\n';
    };
  }

  std::atomic<size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mu;
  std::exception_ptr abort_error;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n || abort.load()) return;
      const PuzzleInstance& inst = instances[i];
      try {
        records[i] =
            solve_instance(client, inst, options, &limiter, transcript_sink);
      } catch (const Error& e) {
        if (e.code() == errc::auth_error) {
          // Credentials problems poison every remaining request.
          std::lock_guard<std::mutex> lock(error_mu);
          if (!abort_error) abort_error = std::current_exception();
          abort.store(true);
          return;
        }
        // Transport-level failure on this instance: record an ABSTAIN with
        // the failure text and keep the run going.
        records[i].instance_id = inst.id;
        records[i].solver_id = options.solver_id;
        records[i].temperature = options.temperature;
        records[i].raw_response = "[error] " + std::string(e.what());
        records[i].attempts = 1;
      }
      if (on_record) {
        std::lock_guard<std::mutex> lock(sink_mu);
        on_record(i, records[i]);
      }
    }
  };

  const size_t n_workers =
      std::min<size_t>(static_cast<size_t>(options.concurrency), std::max<size_t>(n, 1));
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  if (!options.transcript_path.empty()) {
    write_file(options.transcript_path, transcript);
  }
  if (abort_error) std::rethrow_exception(abort_error);
  return records;
}

}  // namespace lateral::llm
