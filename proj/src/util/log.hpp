#pragma once

#include <memory>
#include <string>

#include <spdlog/logger.h>

namespace mecw {

// Library-wide logger. Silent until a log file is attached.
spdlog::logger& log();
void set_log_file(const std::string& path);
std::string log_file();

}  // namespace mecw
