#include "report/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <json.hpp>

#include "util/error.hpp"
#include "util/log.hpp"

namespace mecw::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kAnalysisFile = "analysis/analysis.json";

// JSON has no infinities; -inf (p underflowed to exactly zero) is stored as null.
json log_p_json(double v) { return std::isinf(v) ? json(nullptr) : json(v); }
double log_p_from(const json& v) { return v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>(); }

json bucket_json(const stats::BucketStat& b) {
  return {{"label", b.label}, {"width", b.width}, {"n", b.n}, {"k", b.k},
          {"accuracy", b.accuracy}, {"log10_p", log_p_json(b.log10_p)}, {"test_id", stats::to_string(b.test_id)}};
}

stats::BucketStat bucket_from(const json& v) {
  stats::BucketStat b;
  b.label = v.at("label").get<std::int64_t>();
  b.width = v.at("width").get<std::int64_t>();
  b.n = v.at("n").get<std::int64_t>();
  b.k = v.at("k").get<std::int64_t>();
  b.accuracy = v.at("accuracy").get<double>();
  b.log10_p = log_p_from(v.at("log10_p"));
  b.test_id = v.at("test_id").get<std::string>() == "point_biserial_t" ? stats::TestId::point_biserial_t
                                                                      : stats::TestId::binomial_vs_null;
  return b;
}

double overall_accuracy(const SeriesAnalysis& s) {
  std::int64_t n = 0, k = 0;
  for (const auto& b : s.buckets) n += b.n, k += b.k;
  return n == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(n);
}

void build_rankings(RunAnalysis& a) {
  for (auto task : tasks::kAllTasks) {
    std::vector<const SeriesAnalysis*> group;
    for (const auto& s : a.series)
      if (s.task == task) group.push_back(&s);
    if (group.empty()) continue;
    // Reference size: the largest bucket every model in the task has.
    std::optional<std::int64_t> reference;
    std::set<std::int64_t> common;
    for (const auto& b : group.front()->buckets) common.insert(b.label);
    for (const auto* s : group) {
      std::set<std::int64_t> mine;
      for (const auto& b : s->buckets)
        if (common.count(b.label)) mine.insert(b.label);
      common = std::move(mine);
    }
    if (!common.empty()) reference = *common.rbegin();

    std::vector<window::RankingEntry> entries;
    for (const auto* s : group) {
      window::RankingEntry e;
      e.model_id = s->model_id;
      const auto* est = s->primary(a.config.estimator.method);
      // Series without an estimate rank as a zero-token window.
      e.mecw_tokens = est ? est->mecw_tokens : std::optional<std::int64_t>(0);
      e.accuracy_at_reference = overall_accuracy(*s);
      if (reference)
        for (const auto& b : s->buckets)
          if (b.label == *reference) e.accuracy_at_reference = b.accuracy;
      entries.push_back(std::move(e));
    }
    std::string name(tasks::to_string(task));
    a.ranking_reference[name] = reference;
    a.rankings.push_back(window::rank_models(name, std::move(entries)));
  }
}

}  // namespace

std::int64_t AnalysisConfig::width_for(tasks::TaskType task) const {
  auto it = bucket_widths.find(task);
  return it == bucket_widths.end() ? kDefaultBucketWidth : it->second;
}

json to_json(const AnalysisConfig& c) {
  json widths = json::object();
  for (const auto& [task, w] : c.bucket_widths) widths[std::string(tasks::to_string(task))] = w;
  return {{"bucket_widths", widths},
          {"bucket_label", "floor(input_tokens / width) * width"},
          {"min_bucket_trials", stats::kMinBucketTrials},
          {"bucket_test", {{"test_id", "binomial_vs_null"}, {"p0", c.p0}}},
          {"estimator", window::to_json(c.estimator)}};
}

const window::MecwEstimate* SeriesAnalysis::primary(window::Method method) const {
  const auto& slot = method == window::Method::threshold_sustained ? threshold : changepoint;
  return slot ? &*slot : nullptr;
}

SeriesAnalysis analyze_series(std::string model_id, tasks::TaskType task, const std::vector<sweep::Trial>& trials,
                              const AnalysisConfig& config) {
  SeriesAnalysis s;
  s.model_id = std::move(model_id);
  s.task = task;
  s.bucket_width = config.width_for(task);
  std::vector<stats::Observation> obs;
  for (const auto& t : trials)
    if (t.cell.model_id == s.model_id && t.cell.task == task) obs.push_back({t.input_tokens.value, t.grade.correct});
  s.trials = static_cast<std::int64_t>(obs.size());

  s.raw_buckets = stats::bucketize(obs, s.bucket_width);
  auto cleaned = stats::clean_buckets(s.raw_buckets);
  s.buckets = std::move(cleaned.kept);
  s.removed_labels = std::move(cleaned.removed_labels);
  stats::apply_binomial_test(s.buckets, config.p0);
  if (!s.removed_labels.empty()) {
    std::string labels;
    for (auto l : s.removed_labels) labels += (labels.empty() ? "" : ",") + std::to_string(l);
    log().info("{}/{}: removed buckets with fewer than {} trials: {}", s.model_id, tasks::to_string(task),
               stats::kMinBucketTrials, labels);
  }

  try {
    s.correlation = stats::point_biserial(obs);
  } catch (const Error& e) {
    s.correlation_error = e.what();
  }
  try {
    window::EstimatorConfig c = config.estimator;
    c.method = window::Method::threshold_sustained;
    s.threshold = window::estimate_mecw(s.buckets, c);
    c.method = window::Method::changepoint_bernoulli;
    s.changepoint = window::estimate_mecw(s.buckets, c);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_data) throw;
    s.estimate_error = e.what();
  }
  return s;
}

RunAnalysis analyze_trials(std::string run_id, const std::vector<sweep::Trial>& trials, const AnalysisConfig& config) {
  window::validate(config.estimator);
  for (const auto& [task, w] : config.bucket_widths)
    if (w <= 0) fail(ErrorCode::invalid_argument, "bucket width must be positive");
  if (!(config.p0 > 0.0 && config.p0 < 1.0)) fail(ErrorCode::invalid_argument, "p0 must lie in (0, 1)");

  RunAnalysis a;
  a.run_id = std::move(run_id);
  a.config = config;
  std::set<std::pair<tasks::TaskType, std::string>> keys;
  for (const auto& t : trials) keys.insert({t.cell.task, t.cell.model_id});
  for (const auto& [task, model_id] : keys) a.series.push_back(analyze_series(model_id, task, trials, config));
  build_rankings(a);
  return a;
}

RunAnalysis analyze_run(const store::Store& store, std::string_view run_id, const AnalysisConfig& config) {
  auto trials = store.load_trials(run_id);
  RunAnalysis a = analyze_trials(std::string(run_id), trials, config);
  fs::path file = store.run_dir(run_id) / kAnalysisFile;
  fs::create_directories(file.parent_path());
  store::write_file_atomic(file, to_json(a).dump(2) + "\n");
  log().info("run {}: analysis of {} trials written to {}", run_id, trials.size(), file.string());
  return a;
}

json to_json(const RunAnalysis& a) {
  json series = json::array();
  for (const auto& s : a.series) {
    json raw = json::array(), kept = json::array();
    for (const auto& b : s.raw_buckets) raw.push_back({{"label", b.label}, {"n", b.n}, {"k", b.k}});
    for (const auto& b : s.buckets) kept.push_back(bucket_json(b));
    json entry = {{"model_id", s.model_id},
                  {"task", tasks::to_string(s.task)},
                  {"bucket_width", s.bucket_width},
                  {"trials", s.trials},
                  {"raw_buckets", raw},
                  {"removed_labels", s.removed_labels},
                  {"buckets", kept}};
    if (s.correlation)
      entry["correlation"] = {{"test_id", "point_biserial_t"},
                              {"r_pb", s.correlation->r_pb},
                              {"df", s.correlation->df},
                              {"log10_p", log_p_json(s.correlation->log10_p)}};
    else
      entry["correlation"] = {{"error", s.correlation_error}};
    json estimates = json::object();
    if (s.threshold) estimates["threshold_sustained"] = window::to_json(*s.threshold);
    if (s.changepoint) estimates["changepoint_bernoulli"] = window::to_json(*s.changepoint);
    entry["estimates"] = estimates;
    entry["estimate_error"] = s.estimate_error.empty() ? json(nullptr) : json(s.estimate_error);
    series.push_back(entry);
  }
  json rankings = json::array();
  for (const auto& r : a.rankings) {
    json entries = json::array();
    for (const auto& e : r.entries)
      entries.push_back({{"model_id", e.model_id},
                         {"mecw_tokens", e.mecw_tokens ? json(*e.mecw_tokens) : json("at_or_above_max_tested")},
                         {"accuracy_at_reference", e.accuracy_at_reference}});
    auto ref = a.ranking_reference.find(r.task);
    json ref_json = ref != a.ranking_reference.end() && ref->second ? json(*ref->second) : json("overall");
    rankings.push_back({{"task", r.task}, {"reference_bucket", ref_json}, {"entries", entries}});
  }
  return {{"format", "mecw-analysis"}, {"version", 1},      {"run_id", a.run_id},
          {"config", to_json(a.config)}, {"series", series}, {"rankings", rankings}};
}

RunAnalysis analysis_from_json(const json& doc) {
  try {
    RunAnalysis a;
    a.run_id = doc.at("run_id").get<std::string>();
    const auto& c = doc.at("config");
    for (const auto& [name, w] : c.at("bucket_widths").items()) {
      auto task = tasks::parse_task(name);
      if (task) a.config.bucket_widths[*task] = w.get<std::int64_t>();
    }
    a.config.p0 = c.at("bucket_test").at("p0").get<double>();
    const auto& est = c.at("estimator");
    a.config.estimator.method = window::parse_method(est.at("method").get<std::string>()).value_or(window::Method::threshold_sustained);
    a.config.estimator.delta = est.at("delta").get<double>();
    a.config.estimator.k_sustain = est.at("k_sustain").get<int>();
    a.config.estimator.baseline_buckets = est.at("baseline_buckets").get<int>();
    a.config.estimator.min_gain = est.at("min_gain").get<double>();
    for (const auto& v : doc.at("series")) {
      SeriesAnalysis s;
      s.model_id = v.at("model_id").get<std::string>();
      auto task = tasks::parse_task(v.at("task").get<std::string>());
      if (!task) fail(ErrorCode::corrupt, "analysis: unknown task");
      s.task = *task;
      s.bucket_width = v.at("bucket_width").get<std::int64_t>();
      s.trials = v.at("trials").get<std::int64_t>();
      for (const auto& b : v.at("raw_buckets")) {
        stats::BucketStat raw;
        raw.label = b.at("label").get<std::int64_t>();
        raw.width = s.bucket_width;
        raw.n = b.at("n").get<std::int64_t>();
        raw.k = b.at("k").get<std::int64_t>();
        raw.accuracy = raw.n ? static_cast<double>(raw.k) / static_cast<double>(raw.n) : 0.0;
        s.raw_buckets.push_back(raw);
      }
      s.removed_labels = v.at("removed_labels").get<std::vector<std::int64_t>>();
      for (const auto& b : v.at("buckets")) s.buckets.push_back(bucket_from(b));
      const auto& corr = v.at("correlation");
      if (corr.contains("r_pb"))
        s.correlation = stats::CorrelationResult{corr.at("r_pb").get<double>(), corr.at("df").get<std::int64_t>(),
                                                 log_p_from(corr.at("log10_p"))};
      else
        s.correlation_error = corr.value("error", std::string());
      const auto& est_doc = v.at("estimates");
      if (est_doc.contains("threshold_sustained")) s.threshold = window::estimate_from_json(est_doc["threshold_sustained"]);
      if (est_doc.contains("changepoint_bernoulli"))
        s.changepoint = window::estimate_from_json(est_doc["changepoint_bernoulli"]);
      if (!v.at("estimate_error").is_null()) s.estimate_error = v["estimate_error"].get<std::string>();
      a.series.push_back(std::move(s));
    }
    for (const auto& r : doc.at("rankings")) {
      window::ModelTaskRanking ranking;
      ranking.task = r.at("task").get<std::string>();
      for (const auto& e : r.at("entries")) {
        window::RankingEntry entry;
        entry.model_id = e.at("model_id").get<std::string>();
        if (e.at("mecw_tokens").is_number_integer()) entry.mecw_tokens = e["mecw_tokens"].get<std::int64_t>();
        entry.accuracy_at_reference = e.at("accuracy_at_reference").get<double>();
        ranking.entries.push_back(entry);
      }
      const auto& ref = r.at("reference_bucket");
      a.ranking_reference[ranking.task] =
          ref.is_number_integer() ? std::optional<std::int64_t>(ref.get<std::int64_t>()) : std::nullopt;
      a.rankings.push_back(std::move(ranking));
    }
    return a;
  } catch (const json::exception& ex) {
    fail(ErrorCode::corrupt, std::string("malformed analysis: ") + ex.what());
  }
}

bool is_analyzed(const store::Store& store, std::string_view run_id) {
  return fs::exists(store.run_dir(run_id) / kAnalysisFile);
}

RunAnalysis load_analysis(const store::Store& store, std::string_view run_id) {
  if (!store.run_exists(run_id)) fail(ErrorCode::not_found, "run '" + std::string(run_id) + "' not found");
  if (!is_analyzed(store, run_id))
    fail(ErrorCode::not_analyzed,
         "run '" + std::string(run_id) + "' has not been analyzed; run `mecw analyze --run " + std::string(run_id) + "` first");
  json doc = json::parse(store::read_file(store.run_dir(run_id) / kAnalysisFile), nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::corrupt, "analysis of run '" + std::string(run_id) + "' is not valid JSON");
  return analysis_from_json(doc);
}

std::vector<std::pair<const SeriesAnalysis*, std::optional<window::MecwEstimate>>> reestimate(
    const RunAnalysis& analysis, const window::EstimatorConfig& config, std::vector<std::string>* errors) {
  std::vector<std::pair<const SeriesAnalysis*, std::optional<window::MecwEstimate>>> out;
  for (const auto& s : analysis.series) {
    try {
      out.emplace_back(&s, window::estimate_mecw(s.buckets, config));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::insufficient_data) throw;
      if (errors) errors->push_back(s.model_id + "/" + std::string(tasks::to_string(s.task)) + ": " + e.what());
      out.emplace_back(&s, std::nullopt);
    }
  }
  return out;
}

}  // namespace mecw::report
