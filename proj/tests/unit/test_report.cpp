#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "report/analysis.hpp"
#include "report/render.hpp"
#include "sweep/runner.hpp"
#include "util/error.hpp"

using namespace mecw;

namespace {

report::SeriesAnalysis series(const std::string& model, std::vector<std::pair<std::int64_t, double>> cells) {
  report::SeriesAnalysis s;
  s.model_id = model;
  s.task = tasks::TaskType::summary;
  s.bucket_width = 100;
  for (auto [label, lp] : cells) s.buckets.push_back({label, 100, 10, 5, 0.5, lp});
  return s;
}

std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[e.path().string()] = store::read_file(e.path());
  return out;
}

std::string make_run(store::Store& s, const std::string& profile = "t0=300,w=40,ph=0.95,pl=0.1") {
  auto plan = testing::small_sim_plan(profile);
  plan.trials_per_size = 10;
  sweep::SweepOptions o;
  o.sync_each_record = false;
  return sweep::run_sweep(plan, synth::default_lexicons(), sweep::default_prompt_template(), s, o);
}

}  // namespace

TEST_CASE("scientific notation from log10") {
  CHECK(report::scientific_from_log10(-243.39254) == "4.05E-244");
  CHECK(report::scientific_from_log10(0.0) == "1.00E+00");
  CHECK(report::scientific_from_log10(-1.0) == "1.00E-01");
  CHECK(report::scientific_from_log10(-2.0 + std::log10(9.996)) == "1.00E-01");
  CHECK(report::scientific_from_log10(-5.5) == "3.16E-06");
  CHECK(report::scientific_from_log10(-std::numeric_limits<double>::infinity()) == "0.00E+00");
  CHECK(report::scientific_from_log10(-1000.0) == "1.00E-1000");
}

TEST_CASE("bucket matrix: models as columns, blanks where a bucket is missing") {
  report::RunAnalysis a;
  a.series.push_back(series("m1", {{0, -1.0}, {100, -2.0}, {200, -3.0}}));
  a.series.push_back(series("m2", {{0, -0.5}, {100, -1.5}}));
  CHECK(report::bucket_matrix(a, tasks::TaskType::summary) ==
        "bucket_label\tm1\tm2\n"
        "0\t1.00E-01\t3.16E-01\n"
        "100\t1.00E-02\t3.16E-02\n"
        "200\t1.00E-03\t\n");
  report::RunAnalysis single;
  single.series.push_back(series("only", {{0, -1.0}}));
  CHECK(report::bucket_matrix(single, tasks::TaskType::summary) == "bucket_label\tonly\n0\t1.00E-01\n");
}

TEST_CASE("reports need a stored analysis") {
  testing::TempDir dir;
  store::Store s(dir.path());
  auto id = make_run(s);
  try {
    report::emit_report(s, id, {tasks::kAllTasks.begin(), tasks::kAllTasks.end()});
    FAIL("expected not_analyzed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_analyzed);
    CHECK(std::string(e.what()).find("analyze") != std::string::npos);
  }
}

TEST_CASE("report emission is bytewise idempotent and traces to stored analysis") {
  testing::TempDir dir;
  store::Store s(dir.path());
  auto id = make_run(s);
  report::analyze_run(s, id, {});
  std::vector<tasks::TaskType> all{tasks::kAllTasks.begin(), tasks::kAllTasks.end()};
  auto first = report::emit_report(s, id, all);
  CHECK(first.notices.empty());
  auto snap = snapshot(s.run_dir(id) / "report");
  report::emit_report(s, id, all);
  CHECK(snapshot(s.run_dir(id) / "report") == snap);
  for (const auto& [path, content] : snap) {
    CAPTURE(path);
    CHECK(content.back() == '\n');
    CHECK(content.find("\n\n\n") == std::string::npos);
  }

  auto analysis = report::load_analysis(s, id);
  for (const auto& series : analysis.series)
    for (const auto& b : series.buckets) CHECK(b.n >= stats::kMinBucketTrials);
  CHECK(report::analysis_from_json(report::to_json(analysis)).series.size() == analysis.series.size());
  CHECK(report::to_json(report::analysis_from_json(report::to_json(analysis))) == report::to_json(analysis));
}

TEST_CASE("empty task selection writes nothing and says so") {
  testing::TempDir dir;
  store::Store s(dir.path());
  auto id = make_run(s);
  report::analyze_run(s, id, {});
  auto r = report::emit_accuracy_curves(s, id, {});
  CHECK(r.files.empty());
  REQUIRE(r.notices.size() == 1);
  CHECK_FALSE(std::filesystem::exists(s.run_dir(id) / "report" / "curves"));
}

TEST_CASE("constant accuracy is annotated as open-ended") {
  testing::TempDir dir;
  store::Store s(dir.path());
  auto id = make_run(s, "t0=1000000,w=10,ph=1,pl=1");
  report::analyze_run(s, id, {});
  report::emit_accuracy_curves(s, id, {tasks::TaskType::summary});
  auto summary = store::read_file(s.run_dir(id) / "report" / "curves" / "summary.txt");
  CHECK(summary.find("summary\twidth=100\tMECW=at_or_above_max_tested method=threshold_sustained") !=
        std::string::npos);
  auto curve = store::read_file(s.run_dir(id) / "report" / "curves" / "summary__sim-a.tsv");
  CHECK(curve.rfind("bucket_label\taccuracy\tn\n", 0) == 0);
}
