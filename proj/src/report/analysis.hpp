#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stats/stats.hpp"
#include "store/store.hpp"
#include "tasks/tasks.hpp"
#include "window/window.hpp"

namespace mecw::report {

inline constexpr std::int64_t kNeedleBucketWidth = 5000;
inline constexpr std::int64_t kDefaultBucketWidth = 100;

struct AnalysisConfig {
  std::map<tasks::TaskType, std::int64_t> bucket_widths{{tasks::TaskType::needle, kNeedleBucketWidth},
                                                        {tasks::TaskType::needles, kDefaultBucketWidth},
                                                        {tasks::TaskType::summary, kDefaultBucketWidth},
                                                        {tasks::TaskType::sorted, kDefaultBucketWidth}};
  double p0 = 0.5;
  window::EstimatorConfig estimator;

  std::int64_t width_for(tasks::TaskType task) const;
};

nlohmann::json to_json(const AnalysisConfig& c);

// Statistics of one (model, task) pair.
struct SeriesAnalysis {
  std::string model_id;
  tasks::TaskType task = tasks::TaskType::needle;
  std::int64_t bucket_width = 0;
  std::int64_t trials = 0;
  std::vector<stats::BucketStat> raw_buckets;
  std::vector<std::int64_t> removed_labels;
  std::vector<stats::BucketStat> buckets;  // cleaned, with per-bucket test
  std::optional<stats::CorrelationResult> correlation;
  std::string correlation_error;
  std::optional<window::MecwEstimate> threshold;
  std::optional<window::MecwEstimate> changepoint;
  std::string estimate_error;

  // The estimate produced by the configured primary method, if any.
  const window::MecwEstimate* primary(window::Method method) const;
};

struct RunAnalysis {
  std::string run_id;
  AnalysisConfig config;
  std::vector<SeriesAnalysis> series;
  std::vector<window::ModelTaskRanking> rankings;
  std::map<std::string, std::optional<std::int64_t>> ranking_reference;  // task -> reference bucket label
};

SeriesAnalysis analyze_series(std::string model_id, tasks::TaskType task, const std::vector<sweep::Trial>& trials,
                              const AnalysisConfig& config);

RunAnalysis analyze_trials(std::string run_id, const std::vector<sweep::Trial>& trials, const AnalysisConfig& config);

// Loads the run's trials, analyzes them and stores analysis/analysis.json.
RunAnalysis analyze_run(const store::Store& store, std::string_view run_id, const AnalysisConfig& config);

nlohmann::json to_json(const RunAnalysis& a);
RunAnalysis analysis_from_json(const nlohmann::json& doc);

bool is_analyzed(const store::Store& store, std::string_view run_id);
// Throws Error(not_analyzed) pointing at the analyze command when missing.
RunAnalysis load_analysis(const store::Store& store, std::string_view run_id);

// Re-estimates every stored series with another estimator configuration.
std::vector<std::pair<const SeriesAnalysis*, std::optional<window::MecwEstimate>>> reestimate(
    const RunAnalysis& analysis, const window::EstimatorConfig& config, std::vector<std::string>* errors = nullptr);

}  // namespace mecw::report
