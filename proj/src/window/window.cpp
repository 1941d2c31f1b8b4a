#include "window/window.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "util/error.hpp"

namespace mecw::window {

using nlohmann::json;

namespace {

void require_buckets(std::span<const stats::BucketStat> buckets) {
  if (buckets.size() < 2)
    fail(ErrorCode::insufficient_data,
         "MECW estimation needs at least 2 cleaned buckets, got " + std::to_string(buckets.size()));
}

double segment_log_likelihood(std::int64_t k, std::int64_t n) {
  if (n == 0 || k == 0 || k == n) return 0.0;
  double dk = static_cast<double>(k), dn = static_cast<double>(n);
  double p = dk / dn;
  return dk * std::log(p) + (dn - dk) * std::log1p(-p);
}

json optional_tokens(const std::optional<std::int64_t>& v) {
  return v ? json(*v) : json("at_or_above_max_tested");
}

}  // namespace

std::string_view to_string(Method method) {
  return method == Method::threshold_sustained ? "threshold_sustained" : "changepoint_bernoulli";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "threshold_sustained") return Method::threshold_sustained;
  if (name == "changepoint_bernoulli") return Method::changepoint_bernoulli;
  return std::nullopt;
}

void validate(const EstimatorConfig& c) {
  if (!(c.delta >= 0.0 && c.delta <= 1.0)) fail(ErrorCode::invalid_argument, "mecw: delta must lie in [0, 1]");
  if (c.k_sustain < 1) fail(ErrorCode::invalid_argument, "mecw: k_sustain must be >= 1");
  if (c.baseline_buckets < 1) fail(ErrorCode::invalid_argument, "mecw: baseline_buckets must be >= 1");
  if (!(c.min_gain >= 0.0)) fail(ErrorCode::invalid_argument, "mecw: min_gain must be >= 0");
}

std::string MecwEstimate::mecw_text() const {
  return mecw_tokens ? std::to_string(*mecw_tokens) : std::string("at_or_above_max_tested");
}

json to_json(const EstimatorConfig& c) {
  return {{"method", to_string(c.method)},
          {"delta", c.delta},
          {"k_sustain", c.k_sustain},
          {"baseline_buckets", c.baseline_buckets},
          {"min_gain", c.min_gain}};
}

json to_json(const MecwEstimate& e) {
  json trace = json::array();
  for (const auto& v : e.trace) trace.push_back({{"label", v.label}, {"accuracy", v.accuracy}, {"degraded", v.degraded}});
  json out = {{"mecw_tokens", optional_tokens(e.mecw_tokens)},
              {"config", to_json(e.config)},
              {"baseline_accuracy", e.baseline_accuracy},
              {"trace", trace}};
  if (e.change_point)
    out["change_point"] = {{"cut_index", e.change_point->cut_index},
                           {"gain", e.change_point->gain},
                           {"before_accuracy", e.change_point->before_accuracy},
                           {"after_accuracy", e.change_point->after_accuracy},
                           {"reliable", e.change_point->reliable}};
  else
    out["change_point"] = nullptr;
  return out;
}

MecwEstimate estimate_from_json(const json& doc) {
  MecwEstimate e;
  const auto& tokens = doc.at("mecw_tokens");
  if (tokens.is_number_integer()) e.mecw_tokens = tokens.get<std::int64_t>();
  const auto& c = doc.at("config");
  auto method = parse_method(c.at("method").get<std::string>());
  if (!method) fail(ErrorCode::corrupt, "unknown MECW method");
  e.config.method = *method;
  e.config.delta = c.at("delta").get<double>();
  e.config.k_sustain = c.at("k_sustain").get<int>();
  e.config.baseline_buckets = c.at("baseline_buckets").get<int>();
  e.config.min_gain = c.at("min_gain").get<double>();
  e.baseline_accuracy = doc.at("baseline_accuracy").get<double>();
  for (const auto& v : doc.at("trace"))
    e.trace.push_back({v.at("label").get<std::int64_t>(), v.at("accuracy").get<double>(), v.at("degraded").get<bool>()});
  if (doc.contains("change_point") && !doc["change_point"].is_null()) {
    const auto& cp = doc["change_point"];
    e.change_point = ChangePoint{cp.at("cut_index").get<std::size_t>(), cp.at("gain").get<double>(),
                                 cp.at("before_accuracy").get<double>(), cp.at("after_accuracy").get<double>(),
                                 cp.at("reliable").get<bool>()};
  }
  return e;
}

MecwEstimate estimate_threshold(std::span<const stats::BucketStat> buckets, const EstimatorConfig& config) {
  validate(config);
  require_buckets(buckets);
  MecwEstimate e;
  e.config = config;
  e.config.method = Method::threshold_sustained;

  const std::size_t base_n = std::min<std::size_t>(static_cast<std::size_t>(config.baseline_buckets), buckets.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < base_n; ++i) sum += buckets[i].accuracy;
  e.baseline_accuracy = sum / static_cast<double>(base_n);
  const double floor = e.baseline_accuracy - config.delta;

  std::optional<std::size_t> run_start;
  std::size_t run = 0;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    bool degraded = buckets[i].accuracy < floor;
    e.trace.push_back({buckets[i].label, buckets[i].accuracy, degraded});
    run = degraded ? run + 1 : 0;
    if (!run_start && run == static_cast<std::size_t>(config.k_sustain)) run_start = i + 1 - run;
  }
  if (run_start) e.mecw_tokens = *run_start == 0 ? buckets[0].label : buckets[*run_start - 1].upper_edge();
  return e;
}

ChangePoint changepoint_bernoulli(std::span<const stats::BucketStat> buckets, double min_gain) {
  require_buckets(buckets);
  std::int64_t total_k = 0, total_n = 0;
  for (const auto& b : buckets) total_k += b.k, total_n += b.n;
  const double single = segment_log_likelihood(total_k, total_n);

  ChangePoint best;
  double best_ll = -std::numeric_limits<double>::infinity();
  std::int64_t k_before = 0, n_before = 0;
  for (std::size_t cut = 1; cut < buckets.size(); ++cut) {
    k_before += buckets[cut - 1].k;
    n_before += buckets[cut - 1].n;
    double ll = segment_log_likelihood(k_before, n_before) +
                segment_log_likelihood(total_k - k_before, total_n - n_before);
    if (ll > best_ll) {
      best_ll = ll;
      best.cut_index = cut;
      best.before_accuracy = static_cast<double>(k_before) / static_cast<double>(n_before);
      best.after_accuracy =
          static_cast<double>(total_k - k_before) / static_cast<double>(total_n - n_before);
    }
  }
  best.gain = std::max(0.0, best_ll - single);
  best.reliable = best.gain >= min_gain;
  return best;
}

MecwEstimate estimate_changepoint(std::span<const stats::BucketStat> buckets, const EstimatorConfig& config) {
  validate(config);
  require_buckets(buckets);
  MecwEstimate e;
  e.config = config;
  e.config.method = Method::changepoint_bernoulli;
  ChangePoint cp = changepoint_bernoulli(buckets, config.min_gain);
  e.change_point = cp;
  e.baseline_accuracy = cp.before_accuracy;
  bool drop = cp.reliable && cp.after_accuracy < cp.before_accuracy;
  for (std::size_t i = 0; i < buckets.size(); ++i)
    e.trace.push_back({buckets[i].label, buckets[i].accuracy, drop && i >= cp.cut_index});
  if (drop) e.mecw_tokens = buckets[cp.cut_index - 1].upper_edge();
  return e;
}

MecwEstimate estimate_mecw(std::span<const stats::BucketStat> buckets, const EstimatorConfig& config) {
  return config.method == Method::threshold_sustained ? estimate_threshold(buckets, config)
                                                      : estimate_changepoint(buckets, config);
}

double cascade_success(double p, std::int64_t n) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::invalid_argument, "cascade_success: probability must lie in [0, 1]");
  if (n < 1) fail(ErrorCode::invalid_argument, "cascade_success: need at least one agent");
  double out = 1.0;
  for (std::int64_t i = 0; i < n; ++i) out *= p;
  return out;
}

ModelTaskRanking rank_models(std::string task, std::vector<RankingEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.mecw_tokens != b.mecw_tokens) {
      if (!a.mecw_tokens) return true;
      if (!b.mecw_tokens) return false;
      return *a.mecw_tokens > *b.mecw_tokens;
    }
    if (a.accuracy_at_reference != b.accuracy_at_reference) return a.accuracy_at_reference > b.accuracy_at_reference;
    return a.model_id < b.model_id;
  });
  return {std::move(task), std::move(entries)};
}

}  // namespace mecw::window
