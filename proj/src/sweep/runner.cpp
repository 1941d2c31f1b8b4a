#include "sweep/runner.hpp"

#include <atomic>
#include <condition_variable>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "util/clock.hpp"
#include "util/digest.hpp"
#include "util/error.hpp"
#include "util/log.hpp"

namespace mecw::sweep {

using nlohmann::json;

std::string harness_version() { return "1.0.0"; }

namespace {

struct CellResult {
  std::optional<Trial> trial;
  model::CompletionResult completion;
  std::exception_ptr error;
};

CellResult process_cell(const RunContext& ctx, const model::ModelEndpoint& endpoint, const CellKey& cell,
                        const SweepOptions& options) {
  CellResult out;
  const std::uint64_t seed = trial_seed(ctx.plan, cell);

  rng::Stream sample(seed, "sample");
  std::vector<synth::FactRow> rows;
  rows.reserve(static_cast<std::size_t>(cell.row_count));
  for (auto index : sample.sample_without_replacement(ctx.dataset.rows.size(), static_cast<std::uint64_t>(cell.row_count)))
    rows.push_back(ctx.dataset.rows[index]);

  rng::Stream question_stream(seed, "question");
  tasks::QuestionInstance question = tasks::make_question(cell.task, rows, ctx.lexicons, question_stream);
  rng::Stream shuffle(seed, "shuffle");
  std::string prompt = build_prompt(rows, question, ctx.prompt, shuffle);

  const std::string& system = ctx.prompt.system_instruction;
  std::string sent = system + "\n" + prompt;
  model::TokenCount estimate = model::count_tokens(sent, std::nullopt);
  rng::Stream sim_stream(seed, "simulate", {rng::fnv1a64(endpoint.model_id)});
  model::SimulationContext sim{&question, estimate.value, &sim_stream};

  std::optional<std::string> started;
  if (!endpoint.simulated()) started = utc_now_iso();
  out.completion = model::complete_with_retry(endpoint, system, prompt, &sim, options.retry);
  if (out.completion.transport_status != model::TransportStatus::ok) return out;

  Trial t;
  t.run_id = ctx.run_id;
  t.cell = cell;
  t.trial_seed = seed;
  t.prompt_hash = "sha256:" + sha256_hex(prompt);
  t.prompt_text = std::move(prompt);
  t.input_tokens = model::count_tokens(sent, out.completion.prompt_tokens_reported);
  t.output_tokens = out.completion.completion_tokens_reported;
  t.grade = tasks::grade(out.completion.text, question.expected);
  t.question = std::move(question);
  t.raw_response = out.completion.text;
  if (t.raw_response.size() > store::kMaxResponseBytes) {
    std::size_t cut = store::kMaxResponseBytes;
    while (cut > 0 && (static_cast<unsigned char>(t.raw_response[cut]) & 0xC0) == 0x80) --cut;
    t.raw_response.resize(cut);
    t.response_truncated = true;
  }
  t.latency_ms = out.completion.latency_ms;
  t.attempts = out.completion.attempts;
  t.started_at = started;
  if (started) t.finished_at = utc_now_iso();
  out.trial = std::move(t);
  return out;
}

// Returns false when the endpoint must be abandoned or the budget is spent.
bool commit(CellResult& result, const CellKey& cell, TrialSink& sink, SweepOutcome& outcome,
            const SweepOptions& options) {
  if (result.error) std::rethrow_exception(result.error);
  const auto status = result.completion.transport_status;
  if (status == model::TransportStatus::fatal_failure) {
    log().error("endpoint '{}' failed fatally: {}", cell.model_id, result.completion.error);
    sink.record_skipped_endpoint(cell.model_id, result.completion.error);
    outcome.skipped_endpoints.emplace_back(cell.model_id, result.completion.error);
    return false;
  }
  if (status == model::TransportStatus::retryable_failure) {
    log().warn("transport failure for {}/{}/{}/{}: {}", cell.model_id, tasks::to_string(cell.task), cell.row_count,
               cell.trial_index, result.completion.error);
    sink.record_transport_failure(cell, result.completion);
    ++outcome.transport_failures;
    return true;
  }
  sink.append(*result.trial);
  ++outcome.trials_committed;
  if (options.stop_after_trials && outcome.trials_committed >= *options.stop_after_trials) {
    outcome.interrupted = true;
    return false;
  }
  return true;
}

bool run_endpoint(const RunContext& ctx, const model::ModelEndpoint& endpoint, const std::vector<CellKey>& cells,
                  TrialSink& sink, SweepOutcome& outcome, const SweepOptions& options) {
  const std::size_t workers =
      endpoint.simulated() ? 1 : std::min<std::size_t>(static_cast<std::size_t>(endpoint.max_concurrency), cells.size());
  if (workers <= 1) {
    for (const auto& cell : cells) {
      ++outcome.cells_attempted;
      CellResult r;
      try {
        r = process_cell(ctx, endpoint, cell, options);
      } catch (...) {
        r.error = std::current_exception();
      }
      if (!commit(r, cell, sink, outcome, options)) return !outcome.interrupted;
    }
    return true;
  }

  // Up to `workers` requests in flight; results are committed strictly in
  // cell order so the stored table does not depend on scheduling.
  std::vector<std::optional<CellResult>> slots(cells.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  bool keep_going = true;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= cells.size() || stop.load()) return;
          CellResult r;
          try {
            r = process_cell(ctx, endpoint, cells[i], options);
          } catch (...) {
            r.error = std::current_exception();
          }
          {
            std::lock_guard lock(mutex);
            slots[i] = std::move(r);
          }
          ready.notify_all();
        }
      });
    }
    try {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return slots[i].has_value(); });
        CellResult r = std::move(*slots[i]);
        lock.unlock();
        ++outcome.cells_attempted;
        if (!commit(r, cells[i], sink, outcome, options)) {
          keep_going = !outcome.interrupted;
          break;
        }
      }
    } catch (...) {
      stop = true;
      throw;
    }
    stop = true;
  }
  return keep_going;
}

class StoreSink : public TrialSink {
 public:
  StoreSink(store::Store& store, std::string run_id, bool sync)
      : store_(store), run_id_(std::move(run_id)), writer_(store.open_writer(run_id_, sync)) {}

  void append(const Trial& trial) override { writer_.append(trial); }
  void record_transport_failure(const CellKey& cell, const model::CompletionResult& result) override {
    store_.append_failure(run_id_, {{"kind", "transport_failure"},
                                    {"model_id", cell.model_id},
                                    {"task", tasks::to_string(cell.task)},
                                    {"row_count", cell.row_count},
                                    {"trial_index", cell.trial_index},
                                    {"attempts", result.attempts},
                                    {"error", result.error}});
  }
  void record_skipped_endpoint(const std::string& model_id, const std::string& reason) override {
    store_.append_failure(run_id_, {{"kind", "endpoint_skipped"}, {"model_id", model_id}, {"error", reason}});
  }

 private:
  store::Store& store_;
  std::string run_id_;
  store::TrialWriter writer_;
};

json manifest_defaults(const SweepOptions& options) {
  return {{"bucket_width_tokens", {{"needle", 5000}, {"needles", 100}, {"summary", 100}, {"sorted", 100}}},
          {"bucket_label", "floor(input_tokens / width) * width"},
          {"sampling", "temperature and top_p left at provider defaults"},
          {"max_output_tokens", "provider maximum (omitted when not configured)"},
          {"token_count", "provider-reported prompt tokens, else ceil(characters / 4)"},
          {"trials_per_size_default", kDefaultTrialsPerSize},
          {"row_ladder_default", default_row_ladder()},
          {"ladder_note", "row ladder and trials per size are harness defaults"},
          {"retry", {{"max_retries", options.retry.max_retries},
                     {"initial_backoff_ms", options.retry.initial_backoff.count()}}},
          {"bucket_cleanup", "buckets with n <= 2 are dropped"},
          {"bucket_test", {{"test_id", "binomial_vs_null"}, {"p0", 0.5}}},
          {"mecw", {{"method", "threshold_sustained"}, {"delta", 0.05}, {"k_sustain", 2}, {"baseline_buckets", 2}}}};
}

json status_json(const RunContext& ctx, const store::Store& store, const SweepOutcome& outcome) {
  auto trials = store.load_trials(ctx.run_id, {}, store::LoadMode::permissive);
  std::set<CellKey> unique;
  for (const auto& t : trials) unique.insert(t.cell);
  const std::size_t total = enumerate_cells(ctx.plan).size();
  json skipped = json::array();
  for (const auto& [id, reason] : outcome.skipped_endpoints) skipped.push_back({{"model_id", id}, {"reason", reason}});
  return {{"run_id", ctx.run_id},
          {"cells_total", total},
          {"completed_cells", unique.size()},
          {"finished", unique.size() == total},
          {"interrupted", outcome.interrupted},
          {"last_session",
           {{"trials_committed", outcome.trials_committed},
            {"transport_failures", outcome.transport_failures},
            {"skipped_endpoints", skipped}}},
          {"ended_at", ctx.simulation_only ? json(nullptr) : json(utc_now_iso())}};
}

}  // namespace

std::uint64_t trial_seed(const SweepPlan& plan, const CellKey& cell) {
  return rng::derive_seed(plan.sweep_seed, "sweep/trial",
                          {plan.dataset_seed, static_cast<std::uint64_t>(cell.task),
                           static_cast<std::uint64_t>(cell.row_count), static_cast<std::uint64_t>(cell.trial_index)});
}

std::vector<CellKey> enumerate_cells(const SweepPlan& plan) {
  std::vector<CellKey> cells;
  for (const auto& e : plan.endpoints)
    for (auto task : plan.tasks)
      for (auto rows : plan.row_counts)
        for (int i = 0; i < plan.trials_per_size; ++i) cells.push_back({e.model_id, task, rows, i});
  return cells;
}

std::string make_run_id(const SweepPlan& plan, const synth::Lexicons& lex, const PromptTemplate& prompt) {
  SweepPlan keyed = plan;
  keyed.run_id.reset();
  std::string material = to_json(keyed).dump() + "|" + lex.id + "|" + prompt.hash;
  bool sim_only = !plan.endpoints.empty();
  for (const auto& e : plan.endpoints) sim_only = sim_only && e.simulated();
  if (sim_only) return "sim-" + sha256_hex(material).substr(0, 12);
  std::string stamp = utc_now_compact();
  return stamp + "-" + sha256_hex(material + "|" + utc_now_iso()).substr(0, 8);
}

RunContext prepare_run(const SweepPlan& plan, const synth::Lexicons& lex, const PromptTemplate& prompt,
                       std::optional<std::string> run_id) {
  validate(plan);
  if (plan.endpoints.empty()) fail(ErrorCode::invalid_argument, "plan: no model endpoints");
  RunContext ctx;
  ctx.plan = plan;
  ctx.lexicons = lex;
  ctx.prompt = prompt;
  ctx.simulation_only = true;
  for (const auto& e : plan.endpoints) ctx.simulation_only = ctx.simulation_only && e.simulated();
  ctx.run_id = run_id ? *run_id : plan.run_id ? *plan.run_id : make_run_id(plan, lex, prompt);
  ctx.dataset = synth::generate_dataset(plan.dataset_size, plan.dataset_seed, lex);
  return ctx;
}

SweepOutcome execute_cells(const RunContext& ctx, std::span<const CellKey> cells, TrialSink& sink,
                           const SweepOptions& options) {
  SweepOutcome outcome;
  for (const auto& endpoint : ctx.plan.endpoints) {
    std::vector<CellKey> mine;
    for (const auto& c : cells)
      if (c.model_id == endpoint.model_id) mine.push_back(c);
    if (mine.empty()) continue;
    log().info("run {}: endpoint '{}' with {} cells", ctx.run_id, endpoint.model_id, mine.size());
    if (!run_endpoint(ctx, endpoint, mine, sink, outcome, options)) break;
  }
  return outcome;
}

std::string run_sweep(const SweepPlan& plan, const synth::Lexicons& lex, const PromptTemplate& prompt,
                      store::Store& store, const SweepOptions& options, SweepOutcome* outcome) {
  if (auto missing = model::missing_credentials(plan.endpoints); !missing.empty())
    fail(ErrorCode::credentials, "missing credential environment variable '" + missing.front() + "'");
  RunContext ctx = prepare_run(plan, lex, prompt);

  store::RunManifest m;
  m.run_id = ctx.run_id;
  m.harness_version = harness_version();
  m.plan = ctx.plan;
  m.plan.run_id = ctx.run_id;
  m.lexicon_id = lex.id;
  m.lexicon_json = synth::canonical_json(lex);
  m.prompt_template_id = prompt.id;
  m.prompt_template_hash = prompt.hash;
  m.prompt_template_json = prompt.source_text;
  m.simulation_only = ctx.simulation_only;
  if (!ctx.simulation_only) m.started_at = utc_now_iso();
  m.defaults = manifest_defaults(options);
  store.create_run(m);
  log().info("run {} created in {}", ctx.run_id, store.run_dir(ctx.run_id).string());

  SweepOutcome result;
  {
    StoreSink sink(store, ctx.run_id, options.sync_each_record);
    auto cells = enumerate_cells(ctx.plan);
    result = execute_cells(ctx, cells, sink, options);
  }
  store.write_status(ctx.run_id, status_json(ctx, store, result));
  if (outcome) *outcome = result;
  return ctx.run_id;
}

std::string resume_sweep(std::string_view run_id, store::Store& store, const SweepOptions& options,
                         SweepOutcome* outcome) {
  store::RunManifest m = store.load_manifest(run_id);
  if (auto missing = model::missing_credentials(m.plan.endpoints); !missing.empty())
    fail(ErrorCode::credentials, "missing credential environment variable '" + missing.front() + "'");
  synth::Lexicons lex = synth::parse_lexicons(m.lexicon_json);
  if (lex.id != m.lexicon_id) fail(ErrorCode::corrupt, "manifest lexicon content does not match its hash");
  PromptTemplate prompt = parse_prompt_template(m.prompt_template_json);
  if (prompt.hash != m.prompt_template_hash) fail(ErrorCode::corrupt, "manifest prompt template does not match its hash");
  RunContext ctx = prepare_run(m.plan, lex, prompt, m.run_id);

  std::set<CellKey> done;
  for (const auto& t : store.load_trials(run_id, {}, store::LoadMode::permissive)) done.insert(t.cell);
  std::vector<CellKey> missing;
  for (const auto& c : enumerate_cells(ctx.plan))
    if (!done.count(c)) missing.push_back(c);
  log().info("resume {}: {} of {} cells missing", ctx.run_id, missing.size(), done.size() + missing.size());

  SweepOutcome result;
  if (!missing.empty()) {
    StoreSink sink(store, ctx.run_id, options.sync_each_record);
    result = execute_cells(ctx, missing, sink, options);
  }
  store.write_status(ctx.run_id, status_json(ctx, store, result));
  if (outcome) *outcome = result;
  return ctx.run_id;
}

}  // namespace mecw::sweep
