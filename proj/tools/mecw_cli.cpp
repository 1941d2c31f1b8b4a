// Command-line front end. Talks to the library only through mecw/mecw.h.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mecw/mecw.h"

namespace {

constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

// Carries a failing status out of a subcommand.
struct Failure {
  mecw_status status;
  std::string message;
};

void check(mecw_status status) {
  if (status != MECW_OK) throw Failure{status, mecw_last_error()};
}

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { mecw_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  ~Handle() { Free(p); }
};

using Plan = Handle<mecw_plan, mecw_plan_free>;
using Lexicons = Handle<mecw_lexicons, mecw_lexicons_free>;
using Dataset = Handle<mecw_dataset, mecw_dataset_free>;

struct StoreOpts {
  std::string out = "runs";
};

struct PlanOpts {
  std::string plan = "default";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> run_id;
  std::string lexicon;
  std::uint64_t stop_after = 0;
  bool no_fsync = false;
};

struct AnalysisOpts {
  mecw_analysis_config config{};
  std::string method = "threshold_sustained";
};

void add_store(CLI::App* cmd, StoreOpts& o) {
  cmd->add_option("--out", o.out, "Run store root directory")->capture_default_str();
}

void add_run(CLI::App* cmd, std::string& run) { cmd->add_option("--run", run, "Run id")->required(); }

void add_plan(CLI::App* cmd, PlanOpts& o) {
  cmd->add_option("--plan", o.plan, "Sweep plan: 'default' or a JSON file path")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Sets both the dataset seed and the sweep seed");
  cmd->add_option("--run-id", o.run_id, "Explicit run id instead of the derived one");
  cmd->add_option("--lexicon", o.lexicon, "Lexicon JSON file (built-in lexicon when omitted)");
  cmd->add_option("--stop-after", o.stop_after, "Stop after this many committed trials (0 = run all)")
      ->capture_default_str();
  cmd->add_flag("--no-fsync", o.no_fsync, "Skip fdatasync after each trial record");
}

void add_estimator(CLI::App* cmd, AnalysisOpts& o) {
  cmd->add_option("--method", o.method, "MECW estimator")
      ->check(CLI::IsMember({"threshold_sustained", "changepoint_bernoulli"}))
      ->capture_default_str();
  cmd->add_option("--delta", o.config.delta, "Accuracy drop below baseline that marks a degraded bucket")
      ->capture_default_str();
  cmd->add_option("--k-sustain", o.config.k_sustain, "Consecutive degraded buckets that end the window")
      ->capture_default_str();
  cmd->add_option("--baseline-buckets", o.config.baseline_buckets, "Leading buckets averaged for the baseline")
      ->capture_default_str();
  cmd->add_option("--min-gain", o.config.min_gain, "Minimum change-point log-likelihood gain (nats)")
      ->capture_default_str();
}

void add_analysis(CLI::App* cmd, AnalysisOpts& o) {
  cmd->add_option("--bucket-width", o.config.bucket_width, "Bucket width in tokens for Needles, Summary and Sorted")
      ->capture_default_str();
  cmd->add_option("--needle-bucket-width", o.config.needle_bucket_width, "Bucket width in tokens for Needle")
      ->capture_default_str();
  cmd->add_option("--p0", o.config.p0, "Null success probability of the per-bucket binomial test")
      ->capture_default_str();
  add_estimator(cmd, o);
}

void finalize(AnalysisOpts& o) {
  o.config.method = o.method == "changepoint_bernoulli" ? MECW_METHOD_CHANGEPOINT_BERNOULLI
                                                        : MECW_METHOD_THRESHOLD_SUSTAINED;
}

mecw_sweep_options sweep_options(const PlanOpts& p) {
  mecw_sweep_options o;
  mecw_sweep_options_default(&o);
  o.stop_after_trials = p.stop_after;
  o.sync_each_record = p.no_fsync ? 0 : 1;
  return o;
}

void open_log(const std::string& explicit_path, const std::string& store_root) {
  std::string path = explicit_path;
  if (path.empty() && !store_root.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(store_root, ec);
    if (ec) return;
    path = (std::filesystem::path(store_root) / "mecw.log").string();
  }
  if (!path.empty()) check(mecw_set_log_file(path.c_str()));
}

void load_plan(Plan& plan, const PlanOpts& o) {
  check(mecw_plan_load(o.plan.c_str(), &plan.p));
  if (o.seed) check(mecw_plan_set_seed(plan.p, *o.seed));
  if (o.run_id) check(mecw_plan_set_run_id(plan.p, o.run_id->c_str()));
}

std::string run_plan(const Plan& plan, const PlanOpts& o, const std::string& out) {
  auto opts = sweep_options(o);
  OwnedString run_id, outcome;
  check(mecw_sweep_run(plan.p, out.c_str(), o.lexicon.empty() ? nullptr : o.lexicon.c_str(), &opts, &run_id.p,
                       &outcome.p));
  std::cout << "outcome: " << outcome.str() << "\n";
  return run_id.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum effective context window measurement harness", "mecw"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(mecw_version()));
  std::string log_path;
  app.add_option("--log-file", log_path, "Diagnostic log file (default: <store root>/mecw.log)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic fact-row dataset");
  std::size_t gen_rows = 10000;
  std::uint64_t gen_seed = 1;
  std::string gen_out, gen_lexicon;
  gen->add_option("--rows", gen_rows, "Number of rows")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Dataset seed")->capture_default_str();
  gen->add_option("--lexicon", gen_lexicon, "Lexicon JSON file (built-in lexicon when omitted)");
  gen->add_option("--out", gen_out, "Output file, one sentence per line (stdout when omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a sweep against the endpoints of a provider config");
  StoreOpts sweep_store;
  PlanOpts sweep_plan;
  std::string sweep_config;
  add_store(sweep, sweep_store);
  add_plan(sweep, sweep_plan);
  sweep->add_option("--endpoint-config", sweep_config, "Provider endpoint config JSON (else the plan's endpoints)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Offline sweep, analysis and report against a simulated model");
  StoreOpts sim_store;
  PlanOpts sim_plan;
  AnalysisOpts sim_analysis;
  mecw_analysis_config_default(&sim_analysis.config);
  std::vector<std::string> sim_profiles;
  std::string sim_model = "simulated";
  add_store(sim, sim_store);
  add_plan(sim, sim_plan);
  sim->add_option("--profile,--simulate-profile", sim_profiles,
                  "Degradation profile '[task:]t0=..,w=..,ph=..,pl=..'; repeat for per-task profiles")
      ->required();
  sim->add_option("--model-id", sim_model, "Model id of the simulated endpoint")->capture_default_str();
  add_analysis(sim, sim_analysis);

  // resume
  auto* resume = app.add_subcommand("resume", "Run the missing cells of an interrupted run");
  StoreOpts resume_store;
  std::string resume_run;
  bool resume_no_fsync = false;
  add_store(resume, resume_store);
  add_run(resume, resume_run);
  resume->add_flag("--no-fsync", resume_no_fsync, "Skip fdatasync after each trial record");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Bucket, test and estimate a stored run");
  StoreOpts analyze_store;
  AnalysisOpts analyze_opts;
  mecw_analysis_config_default(&analyze_opts.config);
  std::string analyze_run;
  add_store(analyze, analyze_store);
  add_run(analyze, analyze_run);
  add_analysis(analyze, analyze_opts);

  // mecw
  auto* mecw = app.add_subcommand("mecw", "Re-estimate MECW of an analyzed run, or compute cascade success");
  StoreOpts mecw_store;
  AnalysisOpts mecw_opts;
  mecw_analysis_config_default(&mecw_opts.config);
  std::string mecw_run;
  std::optional<double> cascade_p;
  std::optional<std::int64_t> cascade_n;
  add_store(mecw, mecw_store);
  mecw->add_option("--run", mecw_run, "Run id");
  add_estimator(mecw, mecw_opts);
  mecw->add_option("--cascade-p", cascade_p, "Per-agent success probability for a cascade");
  mecw->add_option("--cascade-n", cascade_n, "Number of agents in the cascade");

  // report
  auto* report = app.add_subcommand("report", "Write tables, curves and rankings of an analyzed run");
  StoreOpts report_store;
  std::string report_run;
  std::optional<std::string> report_tasks;
  add_store(report, report_store);
  add_run(report, report_run);
  report->add_option("--tasks", report_tasks, "Comma-separated tasks to include (all when omitted)");

  // validate-config
  auto* validate = app.add_subcommand("validate-config", "Check a plan and/or provider endpoint config");
  PlanOpts validate_plan;
  std::string validate_config;
  validate->add_option("--plan", validate_plan.plan, "Sweep plan: 'default' or a JSON file path")
      ->capture_default_str();
  validate->add_option("--endpoint-config", validate_config, "Provider endpoint config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    if (app.get_subcommands().empty()) {
      std::cout << app.help("", CLI::AppFormatMode::All);
      return 0;
    }
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "error: " << msg << " (see mecw --help)\n";
    return kExitUser;
  }

  std::string store_root;
  try {
    if (gen->parsed()) {
      if (!log_path.empty()) open_log(log_path, "");
      Lexicons lex;
      if (gen_lexicon.empty()) check(mecw_lexicons_default(&lex.p));
      else check(mecw_lexicons_load(gen_lexicon.c_str(), &lex.p));
      Dataset ds;
      check(mecw_dataset_generate(lex.p, gen_rows, gen_seed, &ds.p));
      if (gen_out.empty()) {
        for (std::size_t i = 0; i < mecw_dataset_size(ds.p); ++i) {
          OwnedString row;
          check(mecw_dataset_row(ds.p, i, &row.p));
          std::cout << row.str() << "\n";
        }
      } else {
        check(mecw_dataset_write(ds.p, gen_out.c_str()));
        std::cout << "wrote " << mecw_dataset_size(ds.p) << " rows to " << gen_out << "\n";
      }
    } else if (sweep->parsed()) {
      store_root = sweep_store.out;
      Plan plan;
      load_plan(plan, sweep_plan);
      if (!sweep_config.empty()) check(mecw_plan_use_endpoint_config(plan.p, sweep_config.c_str()));
      OwnedString missing;
      check(mecw_plan_missing_credentials(plan.p, &missing.p));
      if (!missing.str().empty())
        throw Failure{MECW_E_CREDENTIALS, "missing credentials: set environment variable(s) " + missing.str()};
      open_log(log_path, store_root);
      std::cout << run_plan(plan, sweep_plan, store_root) << "\n";
    } else if (sim->parsed()) {
      store_root = sim_store.out;
      finalize(sim_analysis);
      Plan plan;
      load_plan(plan, sim_plan);
      std::vector<const char*> specs;
      for (const auto& p : sim_profiles) specs.push_back(p.c_str());
      check(mecw_plan_add_simulated(plan.p, sim_model.c_str(), specs.data(), specs.size()));
      open_log(log_path, store_root);
      std::string run_id = run_plan(plan, sim_plan, store_root);
      OwnedString summary, listing;
      check(mecw_analyze(store_root.c_str(), run_id.c_str(), &sim_analysis.config, &summary.p));
      check(mecw_report(store_root.c_str(), run_id.c_str(), nullptr, &listing.p));
      std::cout << summary.str() << "\n" << run_id << "\n";
    } else if (resume->parsed()) {
      store_root = resume_store.out;
      open_log(log_path, store_root);
      mecw_sweep_options opts;
      mecw_sweep_options_default(&opts);
      opts.sync_each_record = resume_no_fsync ? 0 : 1;
      OwnedString outcome;
      check(mecw_sweep_resume(store_root.c_str(), resume_run.c_str(), &opts, &outcome.p));
      std::cout << "outcome: " << outcome.str() << "\n" << resume_run << "\n";
    } else if (analyze->parsed()) {
      store_root = analyze_store.out;
      finalize(analyze_opts);
      open_log(log_path, store_root);
      OwnedString summary;
      check(mecw_analyze(store_root.c_str(), analyze_run.c_str(), &analyze_opts.config, &summary.p));
      std::cout << summary.str();
    } else if (mecw->parsed()) {
      store_root = mecw_store.out;
      finalize(mecw_opts);
      if (cascade_p || cascade_n) {
        if (!cascade_p || !cascade_n) throw Failure{MECW_E_INVALID_ARGUMENT, "--cascade-p and --cascade-n go together"};
        double value = 0;
        check(mecw_cascade_success(*cascade_p, *cascade_n, &value));
        std::printf("%.17g\n", value);
      }
      if (!mecw_run.empty()) {
        open_log(log_path, store_root);
        OwnedString table;
        check(mecw_estimate(store_root.c_str(), mecw_run.c_str(), &mecw_opts.config, &table.p));
        std::cout << table.str();
      } else if (!cascade_p) {
        throw Failure{MECW_E_INVALID_ARGUMENT, "mecw needs --run or --cascade-p/--cascade-n"};
      }
    } else if (report->parsed()) {
      store_root = report_store.out;
      open_log(log_path, store_root);
      OwnedString listing;
      check(mecw_report(store_root.c_str(), report_run.c_str(), report_tasks ? report_tasks->c_str() : nullptr,
                        &listing.p));
      std::cout << listing.str();
    } else if (validate->parsed()) {
      Plan plan;
      load_plan(plan, validate_plan);
      std::cout << "plan ok\n";
      if (!validate_config.empty()) {
        OwnedString summary;
        check(mecw_validate_endpoint_config(validate_config.c_str(), &summary.p));
        std::cout << summary.str() << "endpoint config ok\n";
      }
    }
  } catch (const Failure& f) {
    if (f.status == MECW_E_INTERNAL) {
      OwnedString path;
      mecw_log_file(&path.p);
      std::string where = path.str().empty() ? "rerun with --log-file <path> for details" : "see log " + path.str();
      std::cerr << "internal error (" << mecw_status_name(f.status) << "): " << f.message << "; " << where << "\n";
      return kExitInternal;
    }
    std::cerr << "error (" << mecw_status_name(f.status) << "): " << f.message << "\n";
    return kExitUser;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "; rerun with --log-file <path> for details\n";
    return kExitInternal;
  }
  return 0;
}
