#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stats/stats.hpp"

namespace mecw::window {

enum class Method { threshold_sustained, changepoint_bernoulli };
std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

struct EstimatorConfig {
  Method method = Method::threshold_sustained;
  double delta = 0.05;
  int k_sustain = 2;
  int baseline_buckets = 2;
  // Minimum log-likelihood gain (nats) for a change point to count.
  double min_gain = 5.0;
};

void validate(const EstimatorConfig& config);

struct BucketVerdict {
  std::int64_t label = 0;
  double accuracy = 0.0;
  bool degraded = false;
};

struct ChangePoint {
  std::size_t cut_index = 0;  // first bucket of the second segment
  double gain = 0.0;          // log-likelihood gain over a single segment
  double before_accuracy = 0.0;
  double after_accuracy = 0.0;
  bool reliable = false;
};

struct MecwEstimate {
  // nullopt means the window reaches at least the largest tested bucket.
  std::optional<std::int64_t> mecw_tokens;
  EstimatorConfig config;
  double baseline_accuracy = 0.0;
  std::vector<BucketVerdict> trace;
  std::optional<ChangePoint> change_point;

  bool at_or_above_max_tested() const { return !mecw_tokens.has_value(); }
  std::string mecw_text() const;
};

nlohmann::json to_json(const MecwEstimate& e);
MecwEstimate estimate_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const EstimatorConfig& c);

// Degraded buckets are those with accuracy < baseline - delta, where the
// baseline averages the first `baseline_buckets` buckets. The window ends at
// the upper edge of the bucket preceding the first run of k_sustain
// consecutive degraded buckets. Throws Error(insufficient_data) below two
// buckets.
MecwEstimate estimate_threshold(std::span<const stats::BucketStat> buckets, const EstimatorConfig& config);

// Best split of the bucket sequence into two constant-rate Bernoulli segments.
ChangePoint changepoint_bernoulli(std::span<const stats::BucketStat> buckets, double min_gain = 5.0);

// Window = upper edge of the bucket before the cut, when the cut is reliable
// and accuracy drops across it.
MecwEstimate estimate_changepoint(std::span<const stats::BucketStat> buckets, const EstimatorConfig& config);

MecwEstimate estimate_mecw(std::span<const stats::BucketStat> buckets, const EstimatorConfig& config);

// p^n; throws Error(invalid_argument) for p outside [0, 1] or n < 1.
double cascade_success(double per_agent_success, std::int64_t n_agents);

struct RankingEntry {
  std::string model_id;
  std::optional<std::int64_t> mecw_tokens;
  double accuracy_at_reference = 0.0;
};

struct ModelTaskRanking {
  std::string task;
  std::vector<RankingEntry> entries;
};

// Descending by window (open-ended first), then by reference accuracy
// (higher first), then model id.
ModelTaskRanking rank_models(std::string task, std::vector<RankingEntry> entries);

}  // namespace mecw::window
