#include "sweep/plan.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "util/error.hpp"

namespace mecw::sweep {

using nlohmann::json;

std::vector<std::int64_t> default_row_ladder() { return {1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000}; }

void validate(const SweepPlan& plan) {
  if (plan.tasks.empty()) fail(ErrorCode::invalid_argument, "plan: at least one task is required");
  std::set<tasks::TaskType> seen(plan.tasks.begin(), plan.tasks.end());
  if (seen.size() != plan.tasks.size()) fail(ErrorCode::invalid_argument, "plan: duplicate task");
  if (plan.row_counts.empty()) fail(ErrorCode::invalid_argument, "plan: row_counts must be nonempty");
  for (std::size_t i = 0; i < plan.row_counts.size(); ++i) {
    if (plan.row_counts[i] < 1) fail(ErrorCode::invalid_argument, "plan: row_counts must be positive");
    if (i > 0 && plan.row_counts[i] <= plan.row_counts[i - 1])
      fail(ErrorCode::invalid_argument, "plan: row_counts must be strictly increasing");
  }
  if (static_cast<std::size_t>(plan.row_counts.back()) > plan.dataset_size)
    fail(ErrorCode::invalid_argument, "plan: largest row count " + std::to_string(plan.row_counts.back()) +
                                          " exceeds dataset_size " + std::to_string(plan.dataset_size));
  if (plan.trials_per_size < 1) fail(ErrorCode::invalid_argument, "plan: trials_per_size must be >= 1");
  std::set<std::string> ids;
  for (const auto& e : plan.endpoints) {
    model::validate(e);
    if (!ids.insert(e.model_id).second) fail(ErrorCode::invalid_argument, "plan: duplicate model_id '" + e.model_id + "'");
  }
  if (plan.run_id) {
    if (plan.run_id->empty()) fail(ErrorCode::invalid_argument, "plan: run_id must be nonempty");
    for (char c : *plan.run_id) {
      bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                c == '.';
      if (!ok) fail(ErrorCode::invalid_argument, "plan: run_id may only contain [A-Za-z0-9._-]");
    }
  }
}

json to_json(const SweepPlan& plan) {
  json endpoints = json::array();
  for (const auto& e : plan.endpoints) endpoints.push_back(model::to_json(e));
  json task_names = json::array();
  for (auto t : plan.tasks) task_names.push_back(tasks::to_string(t));
  return {{"format", "mecw-plan"},
          {"version", 1},
          {"endpoints", endpoints},
          {"tasks", task_names},
          {"row_counts", plan.row_counts},
          {"trials_per_size", plan.trials_per_size},
          {"dataset_size", plan.dataset_size},
          {"dataset_seed", plan.dataset_seed},
          {"sweep_seed", plan.sweep_seed},
          {"prompt_template", plan.prompt_template},
          {"run_id", plan.run_id ? json(*plan.run_id) : json(nullptr)}};
}

SweepPlan plan_from_json(const json& doc) {
  if (!doc.is_object()) fail(ErrorCode::invalid_argument, "plan: expected a JSON object");
  static const std::set<std::string> known{"format", "version", "endpoints", "tasks", "row_counts", "trials_per_size",
                                           "dataset_size", "dataset_seed", "sweep_seed", "prompt_template", "run_id"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key)) fail(ErrorCode::invalid_argument, "plan: unknown field '" + key + "'");
  SweepPlan plan;
  try {
    if (doc.contains("endpoints"))
      for (const auto& e : doc["endpoints"]) plan.endpoints.push_back(model::endpoint_from_json(e));
    if (doc.contains("tasks")) {
      plan.tasks.clear();
      for (const auto& t : doc["tasks"]) {
        auto task = tasks::parse_task(t.get<std::string>());
        if (!task) fail(ErrorCode::invalid_argument, "plan: unknown task '" + t.get<std::string>() + "'");
        plan.tasks.push_back(*task);
      }
    }
    if (doc.contains("row_counts")) plan.row_counts = doc["row_counts"].get<std::vector<std::int64_t>>();
    plan.trials_per_size = doc.value("trials_per_size", plan.trials_per_size);
    plan.dataset_size = doc.value("dataset_size", plan.dataset_size);
    plan.dataset_seed = doc.value("dataset_seed", plan.dataset_seed);
    plan.sweep_seed = doc.value("sweep_seed", plan.sweep_seed);
    plan.prompt_template = doc.value("prompt_template", plan.prompt_template);
    if (doc.contains("run_id") && !doc["run_id"].is_null()) plan.run_id = doc["run_id"].get<std::string>();
  } catch (const json::exception& ex) {
    fail(ErrorCode::invalid_argument, std::string("plan: ") + ex.what());
  }
  validate(plan);
  return plan;
}

SweepPlan parse_plan(std::string_view json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::parse, "plan: not valid JSON");
  return plan_from_json(doc);
}

SweepPlan load_plan(const std::string& name_or_path) {
  if (name_or_path == "default") return SweepPlan{};
  std::ifstream in(name_or_path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "plan: cannot open '" + name_or_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_plan(buf.str());
}

}  // namespace mecw::sweep
