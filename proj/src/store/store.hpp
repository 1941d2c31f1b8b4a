#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sweep/plan.hpp"
#include "sweep/prompt.hpp"
#include "sweep/trial.hpp"

namespace mecw::store {

// Version of the trial record and manifest layout.
inline constexpr int kSchemaVersion = 1;
// Raw responses longer than this are cut and flagged.
inline constexpr std::size_t kMaxResponseBytes = 64 * 1024;

struct RunManifest {
  std::string run_id;
  int schema_version = kSchemaVersion;
  std::string harness_version;
  sweep::SweepPlan plan;  // includes endpoints, credentials excluded
  std::string lexicon_id;
  std::string lexicon_json;  // canonical content, so the run can be rebuilt
  std::string prompt_template_id;
  std::string prompt_template_hash;
  std::string prompt_template_json;
  bool simulation_only = false;
  std::optional<std::string> started_at;
  nlohmann::json defaults = nlohmann::json::object();
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& doc);

nlohmann::json trial_to_json(const sweep::Trial& t);
sweep::Trial trial_from_json(const nlohmann::json& doc);
std::string trial_to_line(const sweep::Trial& t);

struct TrialFilter {
  std::optional<std::string> model_id;
  std::optional<tasks::TaskType> task;
  std::optional<std::int64_t> min_tokens;  // inclusive
  std::optional<std::int64_t> max_tokens;  // exclusive
  bool matches(const sweep::Trial& t) const;
};

struct CorruptLine {
  std::size_t line_number = 0;
  std::string reason;
};

enum class LoadMode { strict, permissive };

// Append handle for trials.jsonl. Each append is a single write of one line
// followed by fdatasync; a torn tail from an earlier crash is cut on open.
class TrialWriter {
 public:
  TrialWriter(const std::filesystem::path& file, bool sync_each_record);
  ~TrialWriter();
  TrialWriter(TrialWriter&& other) noexcept;
  TrialWriter& operator=(TrialWriter&&) = delete;
  TrialWriter(const TrialWriter&) = delete;
  TrialWriter& operator=(const TrialWriter&) = delete;

  void append(const sweep::Trial& trial);
  std::size_t records_written() const { return written_; }

 private:
  std::filesystem::path file_;
  int fd_ = -1;
  bool sync_;
  std::size_t written_ = 0;
  std::size_t base_records_ = 0;
};

// Per-run directories under a root:
//   <root>/<run_id>/manifest.json   written once, before any trial
//   <root>/<run_id>/trials.jsonl    one trial record per line, append-only
//   <root>/<run_id>/failures.jsonl  transport failures and skipped endpoints
//   <root>/<run_id>/status.json     completion summary, rewritten at run end
class Store {
 public:
  explicit Store(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(std::string_view run_id) const;
  bool run_exists(std::string_view run_id) const;

  void create_run(const RunManifest& manifest);
  RunManifest load_manifest(std::string_view run_id) const;

  TrialWriter open_writer(std::string_view run_id, bool sync_each_record = true) const;
  void append_trial(std::string_view run_id, const sweep::Trial& trial) const;
  std::vector<sweep::Trial> load_trials(std::string_view run_id, const TrialFilter& filter = {},
                                        LoadMode mode = LoadMode::strict,
                                        std::vector<CorruptLine>* corrupt = nullptr) const;

  void append_failure(std::string_view run_id, const nlohmann::json& record) const;
  std::vector<nlohmann::json> load_failures(std::string_view run_id) const;
  void write_status(std::string_view run_id, const nlohmann::json& status) const;
  std::optional<nlohmann::json> load_status(std::string_view run_id) const;

 private:
  std::filesystem::path root_;
};

// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

}  // namespace mecw::store
