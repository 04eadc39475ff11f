#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lateralbench/dataset.hpp"
#include "lateralbench/io.hpp"
#include "lateralbench/llm/client.hpp"
#include "lateralbench/llm/solver.hpp"
#include "lateralbench/mcq/checkpoint.hpp"
#include "lateralbench/mcq/train.hpp"
#include "lateralbench/metrics.hpp"
#include "lateralbench/report.hpp"
#include "lateralbench/sweep.hpp"

namespace fs = std::filesystem;
using namespace lateral;

namespace {

// Exit codes: 0 success, 1 validation/score failure, 2 I/O or config error,
// 3 remote-service abort.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRemote = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case errc::auth_error:
    case errc::transport_error:
    case errc::rate_limited:
      return kExitRemote;
    case errc::io_error:
    case errc::bad_config:
    case errc::malformed_file:
    case errc::plan_mismatch:
      return kExitConfig;
    default:
      return kExitFailure;
  }
}

struct LlmFlags {
  std::string endpoint;
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "LATERALBENCH_API_KEY";
  double temperature = 0.0;
  int max_tokens = 256;
  int retries = 3;
  int concurrency = 1;
  int rpm = 0;
  int timeout_s = 30;
  std::string choices_header;  // empty keeps the protocol default
  bool transcript = false;

  void add_to(CLI::App* cmd, bool with_temperature) {
    cmd->add_option("--endpoint", endpoint,
                    "Chat-completions endpoint URL (selects the LLM solver)");
    cmd->add_option("--model", model, "Model name sent in requests");
    cmd->add_option("--api-key-env", api_key_env,
                    "Environment variable holding the API key");
    if (with_temperature) {
      cmd->add_option("--temperature", temperature, "Sampling temperature")
          ->check(CLI::Range(0.0, 2.0));
    }
    cmd->add_option("--max-tokens", max_tokens, "Response token cap");
    cmd->add_option("--retries", retries, "Parse-failure retry budget");
    cmd->add_option("--concurrency", concurrency, "Max in-flight requests");
    cmd->add_option("--rpm", rpm, "Requests-per-minute cap (0 = uncapped)");
    cmd->add_option("--timeout", timeout_s, "Per-request timeout, seconds");
    cmd->add_option("--prompt-choices-header", choices_header,
                    "Override the prompt's choice-list header line");
    cmd->add_flag("--transcript", transcript,
                  "Persist raw request/response transcripts");
  }

  llm::SolverOptions solver_options(const std::string& transcript_path) const {
    llm::SolverOptions opts;
    opts.solver_id = "llm:" + model;
    opts.model_name = model;
    opts.temperature = temperature;
    opts.max_tokens = max_tokens;
    opts.retry_budget = retries;
    opts.concurrency = concurrency;
    opts.requests_per_minute = rpm;
    opts.timeout = std::chrono::seconds(timeout_s);
    if (!choices_header.empty()) opts.prompt.choices_header = choices_header;
    opts.transcript_path = transcript ? transcript_path : "";
    return opts;
  }

  llm::HttpClientConfig client_config(uint64_t seed) const {
    llm::HttpClientConfig cfg;
    cfg.endpoint_url = endpoint;
    cfg.api_key = llm::api_key_from_env(api_key_env);
    cfg.jitter_seed = seed;
    return cfg;
  }
};

std::vector<metrics::CellId> parse_cells(const std::string& spec) {
  if (spec.empty()) return metrics::all_cells();
  std::vector<metrics::CellId> cells;
  std::stringstream ss(spec);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto id = metrics::cell_from_name(name);
    if (!id) throw Error(errc::bad_config, "unknown cell \"" + name + "\"");
    cells.push_back(*id);
  }
  if (cells.empty()) throw Error(errc::bad_config, "empty cell set");
  return cells;
}

std::vector<double> parse_temps(const std::string& spec) {
  if (spec.empty()) return sweep::default_temperature_grid();
  const auto colon1 = spec.find(':');
  if (colon1 != std::string::npos) {
    const auto colon2 = spec.find(':', colon1 + 1);
    if (colon2 == std::string::npos) {
      throw Error(errc::bad_config, "--temps wants start:stop:step or a list");
    }
    return sweep::temperature_grid(std::stod(spec.substr(0, colon1)),
                                   std::stod(spec.substr(colon1 + 1, colon2 - colon1 - 1)),
                                   std::stod(spec.substr(colon2 + 1)));
  }
  std::vector<double> temps;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) temps.push_back(std::stod(item));
  return temps;
}

int cmd_validate(const std::string& data_path) {
  std::vector<PuzzleInstance> instances;
  try {
    instances = load_dataset_lenient(data_path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }
  const ValidationReport report = validate(instances);
  std::cout << report.to_text();
  return report.has_errors() ? kExitFailure : kExitOk;
}

struct TrainFlags {
  std::string data_path;
  std::string out_path = "model.ckpt";
  std::string log_path;
  uint64_t seed = 0;
  int min_freq = 1;
  mcq::EncoderConfig encoder;
  mcq::TrainConfig trainer;
};

int cmd_train(const TrainFlags& flags) {
  const auto instances = load_dataset(flags.data_path);
  std::vector<std::string> corpus;
  for (const auto& inst : instances) {
    corpus.push_back(inst.question);
    for (const auto& choice : inst.choices) corpus.push_back(choice);
  }
  const mcq::Vocabulary vocab = mcq::build_vocab(corpus, flags.min_freq);

  mcq::EncoderConfig config = flags.encoder;
  config.vocab_size = vocab.size();
  config.seed = flags.seed;
  mcq::TrainConfig trainer = flags.trainer;
  trainer.seed = flags.seed;

  mcq::ModelParams params = mcq::ModelParams::init(config, flags.seed);
  try {
    mcq::TrainResult result = mcq::train(std::move(params), instances, vocab, trainer);
    mcq::save_checkpoint(result.params, vocab, flags.out_path);
    if (!flags.log_path.empty()) mcq::save_train_log(result.log, flags.log_path);
    const double acc = result.log.empty()
                           ? mcq::train_accuracy(result.params, instances, vocab)
                           : result.log.back().train_accuracy;
    std::cout << "checkpoint written to " << flags.out_path
              << " (final train accuracy " << acc << ")\n";
    return kExitOk;
  } catch (const mcq::NonFiniteLossError& e) {
    // Keep the last-good parameters so the run is not a total loss.
    mcq::save_checkpoint(e.last_good_params, vocab, flags.out_path);
    if (!flags.log_path.empty()) mcq::save_train_log(e.partial_log, flags.log_path);
    std::cerr << e.what() << "; last-good checkpoint written to "
              << flags.out_path << "\n";
    return kExitFailure;
  }
}

struct EvalFlags {
  std::string data_path;
  std::string out_dir = "eval-out";
  std::string checkpoint;
  std::string cells;
  uint64_t seed = 0;
  LlmFlags llm;
};

std::vector<PredictionRecord> eval_with_checkpoint(
    const EvalFlags& flags, const std::vector<PuzzleInstance>& instances) {
  const mcq::Checkpoint ckpt = mcq::load_checkpoint(flags.checkpoint);
  const int n = static_cast<int>(instances.size());
  std::vector<PredictionRecord> records(static_cast<size_t>(n));
#pragma omp parallel for schedule(dynamic) if (n > 1)
  for (int i = 0; i < n; ++i) {
    const auto& inst = instances[static_cast<size_t>(i)];
    PredictionRecord rec;
    rec.instance_id = inst.id;
    rec.solver_id = "minimcq";
    rec.predicted_index = mcq::predict(ckpt.params, inst, ckpt.vocab);
    records[static_cast<size_t>(i)] = std::move(rec);
  }
  return records;
}

int cmd_eval(const EvalFlags& flags) {
  const auto instances = load_dataset(flags.data_path);
  const auto cells = parse_cells(flags.cells);
  ensure_dir(flags.out_dir);
  const std::string pred_path =
      (fs::path(flags.out_dir) / "predictions.jsonl").string();

  std::vector<PredictionRecord> records;
  if (!flags.checkpoint.empty()) {
    records = eval_with_checkpoint(flags, instances);
  } else {
    llm::HttpChatClient client(flags.llm.client_config(flags.seed));
    const auto options = flags.llm.solver_options(
        (fs::path(flags.out_dir) / "transcript.jsonl").string());
    std::vector<std::pair<size_t, PredictionRecord>> partial;
    try {
      records = llm::solve_dataset(client, instances, options,
                                   [&](size_t i, const PredictionRecord& rec) {
                                     partial.emplace_back(i, rec);
                                   });
    } catch (const Error&) {
      // Flush whatever finished before the abort, in input order.
      std::sort(partial.begin(), partial.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<PredictionRecord> flushed;
      for (auto& [i, rec] : partial) flushed.push_back(std::move(rec));
      save_prediction_log(flushed, pred_path);
      throw;
    }
  }

  save_prediction_log(records, pred_path);
  const auto breakdown = metrics::score_breakdown(records, instances, cells);
  write_file((fs::path(flags.out_dir) / "breakdown.txt").string(),
             report::render_breakdown(breakdown, report::DocFormat::text));
  write_file((fs::path(flags.out_dir) / "breakdown.json").string(),
             report::render_breakdown(breakdown, report::DocFormat::json));
  std::cout << report::render_breakdown(breakdown, report::DocFormat::text);
  return kExitOk;
}

struct SweepFlags {
  std::string data_path;
  std::string out_dir = "sweep-out";
  std::string temps;
  int repeats = 3;
  bool resume = false;
  bool no_svg = false;
  uint64_t seed = 0;
  LlmFlags llm;
};

int cmd_sweep(const SweepFlags& flags) {
  const auto instances = load_dataset(flags.data_path);

  sweep::SweepPlan plan;
  plan.temperatures = parse_temps(flags.temps);
  plan.repeats_per_temperature = flags.repeats;
  plan.state_dir = (fs::path(flags.out_dir) / "state").string();
  plan.solver = flags.llm.solver_options("");
  plan.seed = flags.seed;

  if (!flags.resume && fs::exists(fs::path(plan.state_dir) / "manifest.json")) {
    std::cerr << plan.state_dir
              << " already holds sweep state; pass --resume to continue it\n";
    return kExitConfig;
  }

  llm::HttpChatClient client(flags.llm.client_config(flags.seed));
  const auto result = sweep::run_sweep(plan, client, instances);
  const auto written = report::render_curves(
      result, (fs::path(flags.out_dir) / "curves").string(), !flags.no_svg);
  for (const auto& path : written) std::cout << "wrote " << path << "\n";
  return kExitOk;
}

int cmd_rescore(const std::string& log_path, const std::string& data_path,
                bool as_json) {
  const auto breakdown = report::rescore_from_log(log_path, data_path);
  std::cout << report::render_breakdown(
      breakdown, as_json ? report::DocFormat::json : report::DocFormat::text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for lateral-thinking multiple-choice "
               "puzzles with adversarial variant groups"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read defaults from an INI file (flags win)");

  auto* validate_cmd =
      app.add_subcommand("validate", "Check a dataset file and print a report");
  std::string validate_data;
  validate_cmd->add_option("--data", validate_data, "Dataset JSON file")
      ->required();

  auto* train_cmd =
      app.add_subcommand("train", "Train the miniature pair-encoding scorer");
  TrainFlags train_flags;
  train_cmd->add_option("--data", train_flags.data_path, "Dataset JSON file")
      ->required();
  train_cmd->add_option("--out", train_flags.out_path, "Checkpoint path");
  train_cmd->add_option("--log", train_flags.log_path,
                        "Training log (JSON-lines)");
  train_cmd->add_option("--epochs", train_flags.trainer.epochs, "Epochs");
  train_cmd->add_option("--lr", train_flags.trainer.lr, "Learning rate");
  train_cmd->add_option("--batch-size", train_flags.trainer.batch_size,
                        "Batch size");
  train_cmd->add_option("--seed", train_flags.seed,
                        "Seed for init and shuffling");
  train_cmd->add_option("--d-model", train_flags.encoder.d_model, "Model width");
  train_cmd->add_option("--n-heads", train_flags.encoder.n_heads,
                        "Attention heads");
  train_cmd->add_option("--n-layers", train_flags.encoder.n_layers,
                        "Encoder layers");
  train_cmd->add_option("--d-ff", train_flags.encoder.d_ff,
                        "Feed-forward width");
  train_cmd->add_option("--max-len", train_flags.encoder.max_len,
                        "Max sequence length");
  train_cmd->add_option("--min-freq", train_flags.min_freq,
                        "Vocabulary frequency floor");

  auto* eval_cmd = app.add_subcommand(
      "eval", "Score a solver over a dataset and write predictions + breakdown");
  EvalFlags eval_flags;
  eval_cmd->add_option("--data", eval_flags.data_path, "Dataset JSON file")
      ->required();
  eval_cmd->add_option("--out", eval_flags.out_dir, "Output directory");
  eval_cmd->add_option("--checkpoint", eval_flags.checkpoint,
                       "Model checkpoint (selects the minimcq solver)");
  eval_cmd->add_option("--cells", eval_flags.cells,
                       "Comma list of cells feeding the overall mean");
  eval_cmd->add_option("--seed", eval_flags.seed, "Seed (backoff jitter)");
  eval_flags.llm.add_to(eval_cmd, /*with_temperature=*/true);

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run the temperature sweep against an LLM endpoint");
  SweepFlags sweep_flags;
  sweep_cmd->add_option("--data", sweep_flags.data_path, "Dataset JSON file")
      ->required();
  sweep_cmd->add_option("--out", sweep_flags.out_dir, "Output directory");
  sweep_cmd->add_option("--temps", sweep_flags.temps,
                        "start:stop:step or comma list (default 0:1.2:0.2)");
  sweep_cmd->add_option("--repeats", sweep_flags.repeats,
                        "Repeats per temperature");
  sweep_cmd->add_flag("--resume", sweep_flags.resume,
                      "Continue an interrupted sweep in --out");
  sweep_cmd->add_flag("--no-svg", sweep_flags.no_svg, "Skip the SVG chart");
  sweep_cmd->add_option("--seed", sweep_flags.seed, "Seed (backoff jitter)");
  sweep_flags.llm.add_to(sweep_cmd, /*with_temperature=*/false);

  auto* rescore_cmd = app.add_subcommand(
      "rescore", "Recompute a breakdown from a stored prediction log");
  std::string rescore_log, rescore_data;
  bool rescore_json = false;
  rescore_cmd->add_option("--log", rescore_log, "Prediction log (JSON-lines)")
      ->required();
  rescore_cmd->add_option("--data", rescore_data, "Dataset JSON file")
      ->required();
  rescore_cmd->add_flag("--json", rescore_json, "Emit JSON instead of text");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate_cmd->parsed()) return cmd_validate(validate_data);
    if (train_cmd->parsed()) return cmd_train(train_flags);
    if (eval_cmd->parsed()) {
      if (eval_flags.checkpoint.empty() == eval_flags.llm.endpoint.empty()) {
        std::cerr << "select exactly one solver: --checkpoint or --endpoint\n";
        return kExitConfig;
      }
      return cmd_eval(eval_flags);
    }
    if (sweep_cmd->parsed()) {
      if (sweep_flags.llm.endpoint.empty()) {
        std::cerr << "sweep needs --endpoint\n";
        return kExitConfig;
      }
      return cmd_sweep(sweep_flags);
    }
    if (rescore_cmd->parsed()) {
      return cmd_rescore(rescore_log, rescore_data, rescore_json);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
