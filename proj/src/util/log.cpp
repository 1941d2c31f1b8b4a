#include "util/log.hpp"

#include <mutex>
#include <vector>

#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/null_sink.h>

#include "util/error.hpp"

namespace mecw {

namespace {

std::mutex g_mutex;
std::shared_ptr<spdlog::logger> g_logger = std::make_shared<spdlog::logger>(
    "mecw", std::make_shared<spdlog::sinks::null_sink_mt>());
std::string g_path;
// Replaced loggers stay alive so references handed out by log() never dangle.
std::vector<std::shared_ptr<spdlog::logger>> g_retired;

}  // namespace

spdlog::logger& log() {
  std::lock_guard lock(g_mutex);
  return *g_logger;
}

void set_log_file(const std::string& path) {
  std::shared_ptr<spdlog::logger> logger;
  if (path.empty()) {
    logger = std::make_shared<spdlog::logger>("mecw", std::make_shared<spdlog::sinks::null_sink_mt>());
  } else {
    try {
      logger = std::make_shared<spdlog::logger>("mecw", std::make_shared<spdlog::sinks::basic_file_sink_mt>(path, false));
    } catch (const spdlog::spdlog_ex& e) {
      fail(ErrorCode::io, "cannot open log file '" + path + "': " + e.what());
    }
    logger->set_level(spdlog::level::info);
    logger->flush_on(spdlog::level::info);
  }
  std::lock_guard lock(g_mutex);
  g_retired.push_back(std::move(g_logger));
  g_logger = std::move(logger);
  g_path = path;
}

std::string log_file() {
  std::lock_guard lock(g_mutex);
  return g_path;
}

}  // namespace mecw
