#include "mecw/mecw.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "modelio/modelio.hpp"
#include "report/analysis.hpp"
#include "report/render.hpp"
#include "stats/stats.hpp"
#include "store/store.hpp"
#include "sweep/plan.hpp"
#include "sweep/prompt.hpp"
#include "sweep/runner.hpp"
#include "synthgen/dataset.hpp"
#include "synthgen/lexicons.hpp"
#include "tasks/tasks.hpp"
#include "util/error.hpp"
#include "util/log.hpp"
#include "window/window.hpp"

struct mecw_lexicons {
  mecw::synth::Lexicons value;
};
struct mecw_dataset {
  mecw::synth::Dataset value;
};
struct mecw_plan {
  mecw::sweep::SweepPlan value;
};

namespace {

using namespace mecw;

thread_local std::string g_last_error;

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** out, const std::string& s) {
  if (out) *out = dup(s);
}

mecw_status record(mecw_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, mapping exceptions to status codes.
template <class F>
mecw_status guarded(F&& body) {
  try {
    body();
    return MECW_OK;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::internal) log().error("{}", e.what());
    return record(static_cast<mecw_status>(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return record(MECW_E_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return record(MECW_E_CAPACITY, "out of memory");
  } catch (const std::filesystem::filesystem_error& e) {
    return record(MECW_E_IO, e.what());
  } catch (const std::exception& e) {
    log().error("internal error: {}", e.what());
    return record(MECW_E_INTERNAL, std::string("internal error: ") + e.what());
  } catch (...) {
    return record(MECW_E_INTERNAL, "internal error: unknown exception");
  }
}

void require(const void* p, const char* name) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(name) + " must not be null");
}

sweep::SweepOptions convert(const mecw_sweep_options* o) {
  sweep::SweepOptions out;
  if (!o) return out;
  if (o->stop_after_trials) out.stop_after_trials = o->stop_after_trials;
  out.sync_each_record = o->sync_each_record != 0;
  if (o->max_retries < 0) fail(ErrorCode::invalid_argument, "max_retries must be >= 0");
  if (o->initial_backoff_ms < 0) fail(ErrorCode::invalid_argument, "initial_backoff_ms must be >= 0");
  out.retry.max_retries = o->max_retries;
  out.retry.initial_backoff = std::chrono::milliseconds(o->initial_backoff_ms);
  return out;
}

std::string outcome_json(const sweep::SweepOutcome& o) {
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& [model, reason] : o.skipped_endpoints) skipped.push_back({{"model_id", model}, {"reason", reason}});
  return nlohmann::json{{"cells_attempted", o.cells_attempted},
                        {"trials_committed", o.trials_committed},
                        {"transport_failures", o.transport_failures},
                        {"skipped_endpoints", skipped},
                        {"interrupted", o.interrupted}}
      .dump();
}

window::EstimatorConfig estimator_of(const mecw_analysis_config& c) {
  window::EstimatorConfig e;
  if (c.method == MECW_METHOD_THRESHOLD_SUSTAINED) e.method = window::Method::threshold_sustained;
  else if (c.method == MECW_METHOD_CHANGEPOINT_BERNOULLI) e.method = window::Method::changepoint_bernoulli;
  else fail(ErrorCode::invalid_argument, "unknown estimator method");
  e.delta = c.delta;
  e.k_sustain = c.k_sustain;
  e.baseline_buckets = c.baseline_buckets;
  e.min_gain = c.min_gain;
  window::validate(e);
  return e;
}

report::AnalysisConfig analysis_of(const mecw_analysis_config& c) {
  if (c.bucket_width <= 0 || c.needle_bucket_width <= 0)
    fail(ErrorCode::invalid_argument, "bucket widths must be positive");
  if (!(c.p0 > 0.0 && c.p0 < 1.0)) fail(ErrorCode::invalid_argument, "p0 must lie strictly between 0 and 1");
  report::AnalysisConfig out;
  for (auto task : tasks::kAllTasks)
    out.bucket_widths[task] = task == tasks::TaskType::needle ? c.needle_bucket_width : c.bucket_width;
  out.p0 = c.p0;
  out.estimator = estimator_of(c);
  return out;
}

std::vector<tasks::TaskType> parse_task_list(const char* csv) {
  if (!csv) return {tasks::kAllTasks.begin(), tasks::kAllTasks.end()};
  std::vector<tasks::TaskType> out;
  std::string_view rest = csv;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    auto name = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (name.empty()) continue;
    auto task = tasks::parse_task(name);
    if (!task) fail(ErrorCode::invalid_argument, "unknown task '" + std::string(name) + "'");
    if (std::find(out.begin(), out.end(), *task) == out.end()) out.push_back(*task);
  }
  return out;
}

}  // namespace

extern "C" {

const char* mecw_version(void) {
  static const std::string version = sweep::harness_version();
  return version.c_str();
}

const char* mecw_status_name(mecw_status status) {
  switch (status) {
    case MECW_OK: return "ok";
    case MECW_E_INVALID_ARGUMENT: return "invalid_argument";
    case MECW_E_CAPACITY: return "capacity";
    case MECW_E_PARSE: return "parse";
    case MECW_E_NOT_FOUND: return "not_found";
    case MECW_E_IO: return "io";
    case MECW_E_CORRUPT: return "corrupt";
    case MECW_E_DEGENERATE_INPUT: return "degenerate_input";
    case MECW_E_INSUFFICIENT_DATA: return "insufficient_data";
    case MECW_E_TRANSPORT: return "transport";
    case MECW_E_ORACLE_INTEGRITY: return "oracle_integrity";
    case MECW_E_NOT_ANALYZED: return "not_analyzed";
    case MECW_E_ALREADY_EXISTS: return "already_exists";
    case MECW_E_CREDENTIALS: return "credentials";
    case MECW_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mecw_last_error(void) { return g_last_error.c_str(); }

void mecw_string_free(char* s) { std::free(s); }

mecw_status mecw_set_log_file(const char* path) {
  return guarded([&] { set_log_file(path ? path : ""); });
}

mecw_status mecw_log_file(char** out) {
  return guarded([&] {
    require(out, "out");
    put(out, log_file());
  });
}

mecw_status mecw_lexicons_default(mecw_lexicons** out) {
  return guarded([&] {
    require(out, "out");
    *out = new mecw_lexicons{synth::default_lexicons()};
  });
}

mecw_status mecw_lexicons_load(const char* path, mecw_lexicons** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new mecw_lexicons{synth::load_lexicons(path)};
  });
}

void mecw_lexicons_free(mecw_lexicons* lex) { delete lex; }

mecw_status mecw_lexicons_id(const mecw_lexicons* lex, char** out) {
  return guarded([&] {
    require(lex, "lexicons");
    require(out, "out");
    put(out, lex->value.id);
  });
}

mecw_status mecw_dataset_generate(const mecw_lexicons* lex, size_t rows, uint64_t seed, mecw_dataset** out) {
  return guarded([&] {
    require(lex, "lexicons");
    require(out, "out");
    *out = new mecw_dataset{synth::generate_dataset(rows, seed, lex->value)};
  });
}

void mecw_dataset_free(mecw_dataset* ds) { delete ds; }

size_t mecw_dataset_size(const mecw_dataset* ds) { return ds ? ds->value.rows.size() : 0; }

mecw_status mecw_dataset_row(const mecw_dataset* ds, size_t index, char** sentence) {
  return guarded([&] {
    require(ds, "dataset");
    require(sentence, "sentence");
    if (index >= ds->value.rows.size()) fail(ErrorCode::invalid_argument, "row index out of range");
    put(sentence, ds->value.rows[index].sentence);
  });
}

mecw_status mecw_dataset_write(const mecw_dataset* ds, const char* path) {
  return guarded([&] {
    require(ds, "dataset");
    require(path, "path");
    std::string text;
    for (const auto& row : ds->value.rows) text += row.sentence + "\n";
    store::write_file_atomic(path, text);
  });
}

mecw_status mecw_render_row(const mecw_lexicons* lex, const char* person, int count, const char* color,
                            const char* item_singular, char** sentence) {
  return guarded([&] {
    require(lex, "lexicons");
    require(person, "person");
    require(color, "color");
    require(item_singular, "item");
    require(sentence, "sentence");
    put(sentence, synth::render_row(person, count, color, item_singular, lex->value));
  });
}

mecw_status mecw_parse_row(const mecw_lexicons* lex, const char* sentence, char** fields_json) {
  return guarded([&] {
    require(lex, "lexicons");
    require(sentence, "sentence");
    require(fields_json, "fields_json");
    auto f = synth::parse_row(sentence, lex->value);
    put(fields_json, nlohmann::json{{"person_name", f.person_name}, {"count", f.count}, {"color", f.color},
                                    {"item", f.item}}
                         .dump());
  });
}

mecw_status mecw_grade(const char* raw_response, const char* expected_json, int* correct, char** reason) {
  return guarded([&] {
    require(raw_response, "raw_response");
    require(expected_json, "expected_json");
    require(correct, "correct");
    auto doc = nlohmann::json::parse(expected_json);
    tasks::ExpectedAnswer expected;
    if (doc.is_number_integer()) expected = tasks::ExpectedAnswer::numeric(doc.get<std::int64_t>());
    else if (doc.is_string()) expected = tasks::ExpectedAnswer::text(doc.get<std::string>());
    else fail(ErrorCode::invalid_argument, "expected answer must be an integer or a string");
    auto result = tasks::grade(raw_response, expected);
    *correct = result.correct ? 1 : 0;
    put(reason, result.failure_reason ? std::string(tasks::to_string(*result.failure_reason)) : std::string());
  });
}

int64_t mecw_count_tokens(const char* text, int64_t reported) {
  std::optional<std::int64_t> r;
  if (reported >= 0) r = reported;
  return model::count_tokens(text ? text : "", r).value;
}

mecw_status mecw_cascade_success(double per_agent_success, int64_t n_agents, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = window::cascade_success(per_agent_success, n_agents);
  });
}

mecw_status mecw_binomial_log10_p(int64_t n, int64_t k, double p0, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = stats::binomial_log10_p(n, k, p0);
  });
}

mecw_status mecw_point_biserial(const int64_t* tokens, const int* correct, size_t n, double* r_pb,
                                double* log10_p) {
  return guarded([&] {
    if (n > 0) {
      require(tokens, "tokens");
      require(correct, "correct");
    }
    std::vector<stats::Observation> obs(n);
    for (size_t i = 0; i < n; ++i) obs[i] = {tokens[i], correct[i] != 0};
    auto r = stats::point_biserial(obs);
    if (r_pb) *r_pb = r.r_pb;
    if (log10_p) *log10_p = r.log10_p;
  });
}

mecw_status mecw_t_two_sided_log10_p(double t, double df, double* out) {
  return guarded([&] {
    require(out, "out");
    if (!(df > 0)) fail(ErrorCode::invalid_argument, "df must be positive");
    *out = stats::student_t_two_sided_log10_p(t, df);
  });
}

mecw_status mecw_format_log10_p(double log10_p, char** out) {
  return guarded([&] {
    require(out, "out");
    put(out, report::scientific_from_log10(log10_p));
  });
}

mecw_status mecw_profile_normalize(const char* spec, char** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    std::string_view s = spec;
    auto colon = s.find(':');
    if (colon == std::string_view::npos) {
      put(out, model::format_profile(model::parse_profile(s)));
      return;
    }
    auto task = tasks::parse_task(s.substr(0, colon));
    if (!task) fail(ErrorCode::invalid_argument, "unknown task in profile '" + std::string(s) + "'");
    put(out, std::string(tasks::to_string(*task)) + ":" + model::format_profile(model::parse_profile(s.substr(colon + 1))));
  });
}

mecw_status mecw_plan_load(const char* name_or_path, mecw_plan** out) {
  return guarded([&] {
    require(name_or_path, "name_or_path");
    require(out, "out");
    *out = new mecw_plan{sweep::load_plan(name_or_path)};
  });
}

void mecw_plan_free(mecw_plan* plan) { delete plan; }

mecw_status mecw_plan_set_seed(mecw_plan* plan, uint64_t seed) {
  return guarded([&] {
    require(plan, "plan");
    plan->value.dataset_seed = seed;
    plan->value.sweep_seed = seed;
  });
}

mecw_status mecw_plan_set_run_id(mecw_plan* plan, const char* run_id) {
  return guarded([&] {
    require(plan, "plan");
    require(run_id, "run_id");
    auto copy = plan->value;
    copy.run_id = std::string(run_id);
    sweep::validate(copy);
    plan->value = std::move(copy);
  });
}

mecw_status mecw_plan_use_endpoint_config(mecw_plan* plan, const char* path) {
  return guarded([&] {
    require(plan, "plan");
    require(path, "path");
    plan->value.endpoints = model::load_endpoint_config(path);
  });
}

mecw_status mecw_plan_add_simulated(mecw_plan* plan, const char* model_id, const char* const* profiles,
                                    size_t n_profiles) {
  return guarded([&] {
    require(plan, "plan");
    require(model_id, "model_id");
    if (n_profiles > 0) require(profiles, "profiles");
    std::vector<std::string> specs;
    for (size_t i = 0; i < n_profiles; ++i) {
      require(profiles[i], "profile");
      specs.emplace_back(profiles[i]);
    }
    for (const auto& e : plan->value.endpoints)
      if (e.model_id == model_id) fail(ErrorCode::invalid_argument, std::string("duplicate model id '") + model_id + "'");
    auto endpoint = model::simulated_endpoint(model_id, model::parse_simulation(specs));
    model::validate(endpoint);
    plan->value.endpoints.push_back(std::move(endpoint));
  });
}

mecw_status mecw_plan_to_json(const mecw_plan* plan, char** out) {
  return guarded([&] {
    require(plan, "plan");
    require(out, "out");
    put(out, sweep::to_json(plan->value).dump(2));
  });
}

mecw_status mecw_plan_missing_credentials(const mecw_plan* plan, char** out) {
  return guarded([&] {
    require(plan, "plan");
    require(out, "out");
    std::string joined;
    for (const auto& name : model::missing_credentials(plan->value.endpoints))
      joined += (joined.empty() ? "" : ",") + name;
    put(out, joined);
  });
}

mecw_status mecw_validate_endpoint_config(const char* path, char** summary) {
  return guarded([&] {
    require(path, "path");
    auto endpoints = model::load_endpoint_config(path);
    std::string text;
    for (const auto& e : endpoints) {
      text += e.model_id + "\t" + (e.simulated() ? "simulated" : e.base_url) + "\tconcurrency=" +
              std::to_string(e.max_concurrency);
      if (!e.simulated()) {
        const char* key = std::getenv(e.auth_env_var.c_str());
        text += "\t" + e.auth_env_var + (key && *key ? " set" : " unset");
      }
      text += "\n";
    }
    put(summary, text);
  });
}

void mecw_sweep_options_default(mecw_sweep_options* options) {
  if (!options) return;
  sweep::SweepOptions d;
  options->stop_after_trials = 0;
  options->sync_each_record = d.sync_each_record ? 1 : 0;
  options->max_retries = d.retry.max_retries;
  options->initial_backoff_ms = d.retry.initial_backoff.count();
}

mecw_status mecw_sweep_run(const mecw_plan* plan, const char* store_root, const char* lexicon_path,
                           const mecw_sweep_options* options, char** run_id, char** outcome) {
  return guarded([&] {
    require(plan, "plan");
    require(store_root, "store_root");
    auto opts = convert(options);
    sweep::validate(plan->value);
    if (plan->value.endpoints.empty()) fail(ErrorCode::invalid_argument, "plan has no endpoints");
    auto missing = model::missing_credentials(plan->value.endpoints);
    if (!missing.empty()) {
      std::string names;
      for (const auto& n : missing) names += (names.empty() ? "" : ", ") + n;
      fail(ErrorCode::credentials, "missing credentials: environment variable(s) " + names + " not set");
    }
    auto lex = lexicon_path ? synth::load_lexicons(lexicon_path) : synth::default_lexicons();
    auto prompt = sweep::load_prompt_template(plan->value.prompt_template);
    store::Store store(store_root);
    sweep::SweepOutcome result;
    auto id = sweep::run_sweep(plan->value, lex, prompt, store, opts, &result);
    put(run_id, id);
    put(outcome, outcome_json(result));
  });
}

mecw_status mecw_sweep_resume(const char* store_root, const char* run_id, const mecw_sweep_options* options,
                              char** outcome) {
  return guarded([&] {
    require(store_root, "store_root");
    require(run_id, "run_id");
    store::Store store(store_root);
    sweep::SweepOutcome result;
    sweep::resume_sweep(run_id, store, convert(options), &result);
    put(outcome, outcome_json(result));
  });
}

void mecw_analysis_config_default(mecw_analysis_config* config) {
  if (!config) return;
  report::AnalysisConfig d;
  config->bucket_width = d.width_for(tasks::TaskType::summary);
  config->needle_bucket_width = d.width_for(tasks::TaskType::needle);
  config->p0 = d.p0;
  config->method = d.estimator.method == window::Method::threshold_sustained ? MECW_METHOD_THRESHOLD_SUSTAINED
                                                                             : MECW_METHOD_CHANGEPOINT_BERNOULLI;
  config->delta = d.estimator.delta;
  config->k_sustain = d.estimator.k_sustain;
  config->baseline_buckets = d.estimator.baseline_buckets;
  config->min_gain = d.estimator.min_gain;
}

mecw_status mecw_analyze(const char* store_root, const char* run_id, const mecw_analysis_config* config,
                         char** summary) {
  return guarded([&] {
    require(store_root, "store_root");
    require(run_id, "run_id");
    mecw_analysis_config c;
    mecw_analysis_config_default(&c);
    if (config) c = *config;
    store::Store store(store_root);
    auto analysis = report::analyze_run(store, run_id, analysis_of(c));
    put(summary, report::summary_text(analysis));
  });
}

mecw_status mecw_estimate(const char* store_root, const char* run_id, const mecw_analysis_config* config,
                          char** table) {
  return guarded([&] {
    require(store_root, "store_root");
    require(run_id, "run_id");
    mecw_analysis_config c;
    mecw_analysis_config_default(&c);
    if (config) c = *config;
    store::Store store(store_root);
    auto analysis = report::load_analysis(store, run_id);
    std::vector<std::string> errors;
    auto estimates = report::reestimate(analysis, estimator_of(c), &errors);
    std::string text;
    for (const auto& [series, estimate] : estimates) {
      text += series->model_id + "\t" + std::string(tasks::to_string(series->task)) + "\t";
      text += estimate ? report::describe_estimate(*estimate) : std::string("MECW=unavailable (insufficient data)");
      text += "\n";
    }
    put(table, text);
  });
}

mecw_status mecw_report(const char* store_root, const char* run_id, const char* tasks_csv, char** listing) {
  return guarded([&] {
    require(store_root, "store_root");
    require(run_id, "run_id");
    store::Store store(store_root);
    auto result = report::emit_report(store, run_id, parse_task_list(tasks_csv));
    std::string text;
    for (const auto& n : result.notices) text += "notice: " + n + "\n";
    for (const auto& f : result.files) text += f.string() + "\n";
    put(listing, text);
  });
}

}  // extern "C"
