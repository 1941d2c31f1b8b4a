#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "modelio/modelio.hpp"
#include "store/store.hpp"
#include "sweep/plan.hpp"
#include "sweep/prompt.hpp"
#include "sweep/trial.hpp"
#include "synthgen/dataset.hpp"

namespace mecw::sweep {

// Receives completed trials in cell order from a single writer.
class TrialSink {
 public:
  virtual ~TrialSink() = default;
  virtual void append(const Trial& trial) = 0;
  virtual void record_transport_failure(const CellKey& cell, const model::CompletionResult& result) = 0;
  virtual void record_skipped_endpoint(const std::string& model_id, const std::string& reason) = 0;
};

class MemorySink : public TrialSink {
 public:
  void append(const Trial& trial) override { trials.push_back(trial); }
  void record_transport_failure(const CellKey& cell, const model::CompletionResult& result) override {
    failures.emplace_back(cell, result.error);
  }
  void record_skipped_endpoint(const std::string& model_id, const std::string& reason) override {
    skipped.emplace_back(model_id, reason);
  }

  std::vector<Trial> trials;
  std::vector<std::pair<CellKey, std::string>> failures;
  std::vector<std::pair<std::string, std::string>> skipped;
};

// Everything a cell needs, fixed for the lifetime of a run.
struct RunContext {
  std::string run_id;
  SweepPlan plan;
  synth::Lexicons lexicons;
  PromptTemplate prompt;
  synth::Dataset dataset;
  bool simulation_only = false;
};

RunContext prepare_run(const SweepPlan& plan, const synth::Lexicons& lex, const PromptTemplate& prompt,
                       std::optional<std::string> run_id = std::nullopt);

// Simulation-only runs get "sim-<hash>" (reproducible); live runs get
// "<UTC timestamp>-<hash>".
std::string make_run_id(const SweepPlan& plan, const synth::Lexicons& lex, const PromptTemplate& prompt);

// Cell order: endpoints, then tasks, then row counts, then trial index.
std::vector<CellKey> enumerate_cells(const SweepPlan& plan);

// Seed of a cell's randomness; independent of the endpoint so that every
// model sees the same context for the same cell.
std::uint64_t trial_seed(const SweepPlan& plan, const CellKey& cell);

struct SweepOptions {
  model::RetryPolicy retry;
  // Stop after this many trials have been committed (used to emulate an
  // interrupted run).
  std::optional<std::size_t> stop_after_trials;
  bool sync_each_record = true;
};

struct SweepOutcome {
  std::size_t cells_attempted = 0;
  std::size_t trials_committed = 0;
  std::size_t transport_failures = 0;
  std::vector<std::pair<std::string, std::string>> skipped_endpoints;
  bool interrupted = false;
};

SweepOutcome execute_cells(const RunContext& ctx, std::span<const CellKey> cells, TrialSink& sink,
                           const SweepOptions& options = {});

// Runs the full plan into a new run directory; returns the run id.
std::string run_sweep(const SweepPlan& plan, const synth::Lexicons& lex, const PromptTemplate& prompt,
                      store::Store& store, const SweepOptions& options = {}, SweepOutcome* outcome = nullptr);

// Runs only the cells of `run_id` that have no stored trial.
std::string resume_sweep(std::string_view run_id, store::Store& store, const SweepOptions& options = {},
                         SweepOutcome* outcome = nullptr);

std::string harness_version();

}  // namespace mecw::sweep
