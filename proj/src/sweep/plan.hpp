#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "modelio/modelio.hpp"
#include "tasks/tasks.hpp"

namespace mecw::sweep {

inline constexpr int kDefaultTrialsPerSize = 25;
inline constexpr std::size_t kDefaultDatasetSize = 10000;

std::vector<std::int64_t> default_row_ladder();

struct SweepPlan {
  std::vector<model::ModelEndpoint> endpoints;
  std::vector<tasks::TaskType> tasks{tasks::kAllTasks.begin(), tasks::kAllTasks.end()};
  std::vector<std::int64_t> row_counts = default_row_ladder();
  int trials_per_size = kDefaultTrialsPerSize;
  std::size_t dataset_size = kDefaultDatasetSize;
  std::uint64_t dataset_seed = 1;
  std::uint64_t sweep_seed = 1;
  std::string prompt_template = "fact-rows-v1";
  std::optional<std::string> run_id;

  bool operator==(const SweepPlan&) const = default;
};

// Structural checks; endpoints may still be empty here (supplied separately).
void validate(const SweepPlan& plan);

nlohmann::json to_json(const SweepPlan& plan);
SweepPlan plan_from_json(const nlohmann::json& doc);
SweepPlan parse_plan(std::string_view json_text);
// "default" yields the built-in plan; anything else is a file path.
SweepPlan load_plan(const std::string& name_or_path);

}  // namespace mecw::sweep
