#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "report/analysis.hpp"

namespace mecw::report {

// log10_p = -243.39 -> "4.05E-244"; -inf -> "0.00E+00".
std::string scientific_from_log10(double log10_p);

// "MECW=<value> method=<name>" followed by the method's parameters.
std::string describe_estimate(const window::MecwEstimate& estimate);

// Rows are ascending bucket labels, columns are model ids; blank cells where a
// model has no cleaned bucket.
std::string bucket_matrix(const RunAnalysis& analysis, tasks::TaskType task);

// Fixed columns: bucket_label, n, k, accuracy, log10_p, test_id.
std::string bucket_table(const SeriesAnalysis& series);

// Columns: bucket_label, accuracy, n.
std::string accuracy_curve(const SeriesAnalysis& series);

std::string curve_summary(const RunAnalysis& analysis, const std::vector<tasks::TaskType>& tasks);
std::string ranking_table(const RunAnalysis& analysis, const window::ModelTaskRanking& ranking);
std::string summary_text(const RunAnalysis& analysis);

struct ReportResult {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
};

// Writes the p-value matrix for one task under <run>/report/pvalues/.
ReportResult emit_bucket_matrix(const store::Store& store, std::string_view run_id, tasks::TaskType task);

// Writes one curve per (model, task) plus a summary under <run>/report/curves/.
ReportResult emit_accuracy_curves(const store::Store& store, std::string_view run_id,
                                  const std::vector<tasks::TaskType>& tasks);

// Full bundle under <run>/report/: manifest copy, bucket tables, p-value
// matrices, curves, rankings and summary.txt.
ReportResult emit_report(const store::Store& store, std::string_view run_id, const std::vector<tasks::TaskType>& tasks);

}  // namespace mecw::report
