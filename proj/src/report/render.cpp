#include "report/render.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "util/error.hpp"
#include "util/text.hpp"

namespace mecw::report {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string series_file(const SeriesAnalysis& s) {
  return std::string(tasks::to_string(s.task)) + "__" + text::slug(s.model_id) + ".tsv";
}

const SeriesAnalysis* find_series(const RunAnalysis& a, const std::string& model, tasks::TaskType task) {
  for (const auto& s : a.series)
    if (s.model_id == model && s.task == task) return &s;
  return nullptr;
}

void write_text(ReportResult& result, const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::string normalized = content;
  while (!normalized.empty() && normalized.back() == '\n') normalized.pop_back();
  normalized.push_back('\n');
  store::write_file_atomic(path, normalized);
  result.files.push_back(path);
}

std::vector<std::string> models_of(const RunAnalysis& a) {
  std::set<std::string> ids;
  for (const auto& s : a.series) ids.insert(s.model_id);
  return {ids.begin(), ids.end()};
}

}  // namespace

std::string describe_estimate(const window::MecwEstimate& e) {
  std::string line = "MECW=" + e.mecw_text() + " method=" + std::string(window::to_string(e.config.method));
  if (e.config.method == window::Method::threshold_sustained) {
    line += " delta=" + fixed(e.config.delta, 3) + " k_sustain=" + std::to_string(e.config.k_sustain) +
            " baseline_buckets=" + std::to_string(e.config.baseline_buckets) +
            " baseline_accuracy=" + fixed(e.baseline_accuracy, 4);
  } else if (e.change_point) {
    line += " min_gain=" + fixed(e.config.min_gain, 2) + " cut_index=" + std::to_string(e.change_point->cut_index) +
            " gain=" + fixed(e.change_point->gain, 3) + " reliable=" + (e.change_point->reliable ? "yes" : "no");
  }
  return line;
}

std::string scientific_from_log10(double log10_p) {
  if (std::isinf(log10_p) && log10_p < 0) return "0.00E+00";
  double exponent = std::floor(log10_p);
  double mantissa = std::pow(10.0, log10_p - exponent);
  double rounded = std::round(mantissa * 100.0) / 100.0;
  if (rounded >= 10.0) {
    rounded /= 10.0;
    exponent += 1.0;
  }
  char buf[48];
  auto e = static_cast<long long>(exponent);
  std::snprintf(buf, sizeof buf, "%.2fE%c%02lld", rounded, e < 0 ? '-' : '+', e < 0 ? -e : e);
  return buf;
}

std::string bucket_matrix(const RunAnalysis& a, tasks::TaskType task) {
  std::vector<std::string> models;
  for (const auto& id : models_of(a))
    if (find_series(a, id, task)) models.push_back(id);
  std::set<std::int64_t> labels;
  for (const auto& id : models)
    for (const auto& b : find_series(a, id, task)->buckets) labels.insert(b.label);

  std::string out = "bucket_label";
  for (const auto& id : models) out += "\t" + id;
  out += "\n";
  for (auto label : labels) {
    out += std::to_string(label);
    for (const auto& id : models) {
      out += "\t";
      for (const auto& b : find_series(a, id, task)->buckets)
        if (b.label == label) out += scientific_from_log10(b.log10_p);
    }
    out += "\n";
  }
  return out;
}

std::string bucket_table(const SeriesAnalysis& s) {
  std::string out = "bucket_label\tn\tk\taccuracy\tlog10_p\ttest_id\n";
  for (const auto& b : s.buckets)
    out += std::to_string(b.label) + "\t" + std::to_string(b.n) + "\t" + std::to_string(b.k) + "\t" +
           fixed(b.accuracy, 6) + "\t" + fixed(b.log10_p, 6) + "\t" + std::string(stats::to_string(b.test_id)) + "\n";
  return out;
}

std::string accuracy_curve(const SeriesAnalysis& s) {
  std::string out = "bucket_label\taccuracy\tn\n";
  for (const auto& b : s.buckets)
    out += std::to_string(b.label) + "\t" + fixed(b.accuracy, 6) + "\t" + std::to_string(b.n) + "\n";
  return out;
}

std::string curve_summary(const RunAnalysis& a, const std::vector<tasks::TaskType>& selected) {
  std::string out = "# MECW per series (bucket label = lower edge; MECW = bucket upper edge)\n";
  for (const auto& s : a.series) {
    if (std::find(selected.begin(), selected.end(), s.task) == selected.end()) continue;
    out += s.model_id + "\t" + std::string(tasks::to_string(s.task)) + "\twidth=" + std::to_string(s.bucket_width);
    const auto* e = s.primary(a.config.estimator.method);
    out += "\t" + (e ? describe_estimate(*e) : "MECW=unavailable (" + s.estimate_error + ")") + "\n";
  }
  return out;
}

std::string ranking_table(const RunAnalysis& a, const window::ModelTaskRanking& r) {
  auto ref = a.ranking_reference.find(r.task);
  std::string ref_text = ref != a.ranking_reference.end() && ref->second ? std::to_string(*ref->second) : "overall";
  std::string out = "rank\tmodel_id\tmecw_tokens\taccuracy_at_reference\n";
  int rank = 1;
  for (const auto& e : r.entries)
    out += std::to_string(rank++) + "\t" + e.model_id + "\t" +
           (e.mecw_tokens ? std::to_string(*e.mecw_tokens) : std::string("at_or_above_max_tested")) + "\t" +
           fixed(e.accuracy_at_reference, 6) + "\n";
  out += "# reference bucket: " + ref_text + "; method: " + std::string(window::to_string(a.config.estimator.method)) + "\n";
  return out;
}

std::string summary_text(const RunAnalysis& a) {
  std::string out = "run " + a.run_id + "\n";
  out += "bucket label = floor(tokens / width) * width; buckets with fewer than 3 trials removed\n";
  out += "per-bucket test: binomial_vs_null p0=" + fixed(a.config.p0, 3) + "\n\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-28s %-8s %6s %7s %8s %10s  %s\n", "model", "task", "trials", "buckets", "r_pb",
                "log10_p", "estimate");
  out += line;
  for (const auto& s : a.series) {
    std::string r = s.correlation ? fixed(s.correlation->r_pb, 4) : "n/a";
    std::string p = s.correlation ? fixed(s.correlation->log10_p, 2) : "n/a";
    const auto* e = s.primary(a.config.estimator.method);
    std::string est = e ? describe_estimate(*e) : "unavailable (" + s.estimate_error + ")";
    std::snprintf(line, sizeof line, "%-28s %-8s %6lld %7zu %8s %10s  ", s.model_id.c_str(),
                  std::string(tasks::to_string(s.task)).c_str(), static_cast<long long>(s.trials), s.buckets.size(),
                  r.c_str(), p.c_str());
    out += line + est + "\n";
  }
  return out;
}

ReportResult emit_bucket_matrix(const store::Store& store, std::string_view run_id, tasks::TaskType task) {
  RunAnalysis a = load_analysis(store, run_id);
  ReportResult result;
  result.directory = store.run_dir(run_id) / "report";
  write_text(result, result.directory / "pvalues" / (std::string(tasks::to_string(task)) + ".tsv"), bucket_matrix(a, task));
  return result;
}

ReportResult emit_accuracy_curves(const store::Store& store, std::string_view run_id,
                                  const std::vector<tasks::TaskType>& selected) {
  RunAnalysis a = load_analysis(store, run_id);
  ReportResult result;
  result.directory = store.run_dir(run_id) / "report";
  if (selected.empty()) {
    result.notices.push_back("no tasks selected; no curve files written");
    return result;
  }
  bool any = false;
  for (const auto& s : a.series) {
    if (std::find(selected.begin(), selected.end(), s.task) == selected.end()) continue;
    write_text(result, result.directory / "curves" / series_file(s), accuracy_curve(s));
    any = true;
  }
  if (!any) {
    result.notices.push_back("selected tasks have no analyzed series; no curve files written");
    return result;
  }
  write_text(result, result.directory / "curves" / "summary.txt", curve_summary(a, selected));
  return result;
}

ReportResult emit_report(const store::Store& store, std::string_view run_id, const std::vector<tasks::TaskType>& selected) {
  RunAnalysis a = load_analysis(store, run_id);
  ReportResult result;
  result.directory = store.run_dir(run_id) / "report";
  if (selected.empty()) {
    result.notices.push_back("no tasks selected; no report files written");
    return result;
  }
  write_text(result, result.directory / "manifest.json", store::read_file(store.run_dir(run_id) / "manifest.json"));
  for (const auto& s : a.series) {
    if (std::find(selected.begin(), selected.end(), s.task) == selected.end()) continue;
    write_text(result, result.directory / "buckets" / series_file(s), bucket_table(s));
  }
  for (auto task : selected) {
    bool present = false;
    for (const auto& s : a.series) present = present || s.task == task;
    if (!present) {
      result.notices.push_back("task '" + std::string(tasks::to_string(task)) + "' has no trials in this run");
      continue;
    }
    write_text(result, result.directory / "pvalues" / (std::string(tasks::to_string(task)) + ".tsv"), bucket_matrix(a, task));
  }
  auto curves = emit_accuracy_curves(store, run_id, selected);
  result.files.insert(result.files.end(), curves.files.begin(), curves.files.end());
  result.notices.insert(result.notices.end(), curves.notices.begin(), curves.notices.end());
  for (const auto& r : a.rankings) {
    auto task = tasks::parse_task(r.task);
    if (!task || std::find(selected.begin(), selected.end(), *task) == selected.end()) continue;
    write_text(result, result.directory / "rankings" / (r.task + ".tsv"), ranking_table(a, r));
  }
  write_text(result, result.directory / "summary.txt", summary_text(a));
  return result;
}

}  // namespace mecw::report
