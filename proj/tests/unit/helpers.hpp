#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "modelio/modelio.hpp"
#include "sweep/plan.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("mecw-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline mecw::sweep::SweepPlan small_sim_plan(std::string profile = "t0=300,w=40,ph=0.95,pl=0.1") {
  mecw::sweep::SweepPlan plan;
  plan.endpoints.push_back(
      mecw::model::simulated_endpoint("sim-a", mecw::model::parse_simulation({std::move(profile)})));
  plan.row_counts = {1, 5, 10, 20, 40};
  plan.trials_per_size = 4;
  plan.dataset_size = 500;
  plan.dataset_seed = 3;
  plan.sweep_seed = 5;
  return plan;
}

inline std::string data_file(const std::string& name) { return std::string(MECW_DATA_DIR) + "/" + name; }
inline std::string fixture_file(const std::string& name) { return std::string(MECW_FIXTURE_DIR) + "/" + name; }

}  // namespace testing
