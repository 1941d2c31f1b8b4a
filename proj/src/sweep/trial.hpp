#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "modelio/modelio.hpp"
#include "tasks/tasks.hpp"

namespace mecw::sweep {

// Coordinates of one sweep cell.
struct CellKey {
  std::string model_id;
  tasks::TaskType task = tasks::TaskType::needle;
  std::int64_t row_count = 0;
  std::int64_t trial_index = 0;
  auto operator<=>(const CellKey&) const = default;
};

struct Trial {
  std::string run_id;
  CellKey cell;
  std::uint64_t trial_seed = 0;
  std::string prompt_text;
  std::string prompt_hash;  // "sha256:<hex>" of prompt_text
  model::TokenCount input_tokens;
  std::optional<std::int64_t> output_tokens;
  tasks::QuestionInstance question;
  std::string raw_response;
  bool response_truncated = false;
  tasks::GradeResult grade;
  std::int64_t latency_ms = 0;
  int attempts = 1;
  // Absent in simulation runs, which use no wall clock.
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;
  // Fields this version does not know about, kept verbatim on rewrite.
  nlohmann::json extra = nlohmann::json::object();

  int correct_bit() const { return grade.correct ? 1 : 0; }
};

}  // namespace mecw::sweep
