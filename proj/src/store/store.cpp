#include "store/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "util/error.hpp"

namespace mecw::store {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kTrials = "trials.jsonl";
constexpr const char* kFailures = "failures.jsonl";
constexpr const char* kStatus = "status.json";

void write_all(int fd, std::string_view data, const std::string& context) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(ErrorCode::io, context + ": " + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

void append_line(const fs::path& file, const std::string& line) {
  int fd = ::open(file.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::io, "cannot open " + file.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, line, "append to " + file.string());
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fdatasync(fd);
  ::close(fd);
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) fail(ErrorCode::io, "cannot write " + tmp.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, content, "write " + tmp.string());
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::io, "cannot rename " + tmp.string() + ": " + ec.message());
}

TrialWriter::TrialWriter(const fs::path& file, bool sync_each_record) : file_(file), sync_(sync_each_record) {
  fd_ = ::open(file.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) fail(ErrorCode::io, "cannot open " + file.string() + ": " + std::strerror(errno));
  // Drop any torn record left by an interrupted writer.
  std::string existing = read_file(file);
  std::size_t committed = existing.rfind('\n');
  committed = committed == std::string::npos ? 0 : committed + 1;
  if (committed != existing.size() && ::ftruncate(fd_, static_cast<off_t>(committed)) != 0) {
    int err = errno;
    ::close(fd_);
    fail(ErrorCode::io, "cannot repair " + file.string() + ": " + std::strerror(err));
  }
  for (std::size_t i = 0; i < committed; ++i)
    if (existing[i] == '\n') ++base_records_;
  ::lseek(fd_, 0, SEEK_END);
}

TrialWriter::~TrialWriter() {
  if (fd_ >= 0) ::close(fd_);
}

TrialWriter::TrialWriter(TrialWriter&& other) noexcept
    : file_(std::move(other.file_)),
      fd_(other.fd_),
      sync_(other.sync_),
      written_(other.written_),
      base_records_(other.base_records_) {
  other.fd_ = -1;
}

void TrialWriter::append(const sweep::Trial& trial) {
  std::size_t index = base_records_ + written_;
  std::string line = trial_to_line(trial);
  off_t start = ::lseek(fd_, 0, SEEK_END);
  try {
    write_all(fd_, line, "append_trial: record " + std::to_string(index) + " in " + file_.string());
    if (sync_ && ::fdatasync(fd_) != 0)
      fail(ErrorCode::io, "append_trial: sync failed for record " + std::to_string(index) + ": " + std::strerror(errno));
  } catch (...) {
    // Leave no partial line behind.
    if (start >= 0 && ::ftruncate(fd_, start) == 0) ::lseek(fd_, start, SEEK_SET);
    throw;
  }
  ++written_;
}

Store::Store(fs::path root) : root_(std::move(root)) {}

fs::path Store::run_dir(std::string_view run_id) const { return root_ / std::string(run_id); }

bool Store::run_exists(std::string_view run_id) const { return fs::exists(run_dir(run_id) / kManifest); }

void Store::create_run(const RunManifest& manifest) {
  fs::path dir = run_dir(manifest.run_id);
  if (fs::exists(dir / kManifest))
    fail(ErrorCode::already_exists, "run '" + manifest.run_id + "' already exists in " + root_.string());
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / kManifest, to_json(manifest).dump(2) + "\n");
}

RunManifest Store::load_manifest(std::string_view run_id) const {
  fs::path file = run_dir(run_id) / kManifest;
  if (!fs::exists(file)) fail(ErrorCode::not_found, "run '" + std::string(run_id) + "' not found in " + root_.string());
  json doc = json::parse(read_file(file), nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::corrupt, "manifest of run '" + std::string(run_id) + "' is not valid JSON");
  return manifest_from_json(doc);
}

TrialWriter Store::open_writer(std::string_view run_id, bool sync_each_record) const {
  if (!run_exists(run_id)) fail(ErrorCode::not_found, "run '" + std::string(run_id) + "' has no manifest");
  return TrialWriter(run_dir(run_id) / kTrials, sync_each_record);
}

void Store::append_trial(std::string_view run_id, const sweep::Trial& trial) const {
  open_writer(run_id).append(trial);
}

std::vector<sweep::Trial> Store::load_trials(std::string_view run_id, const TrialFilter& filter, LoadMode mode,
                                             std::vector<CorruptLine>* corrupt) const {
  if (!run_exists(run_id)) fail(ErrorCode::not_found, "run '" + std::string(run_id) + "' not found in " + root_.string());
  std::vector<sweep::Trial> out;
  fs::path file = run_dir(run_id) / kTrials;
  if (!fs::exists(file)) return out;
  std::string content = read_file(file);

  auto bad = [&](std::size_t line_no, const std::string& reason) {
    if (mode == LoadMode::strict)
      fail(ErrorCode::corrupt, file.string() + ":" + std::to_string(line_no) + ": " + reason);
    if (corrupt) corrupt->push_back({line_no, reason});
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    ++line_no;
    std::size_t end = content.find('\n', pos);
    if (end == std::string::npos) {
      bad(line_no, "truncated record (no terminating newline)");
      break;
    }
    std::string_view line(content.data() + pos, end - pos);
    pos = end + 1;
    json doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      bad(line_no, "not valid JSON");
      continue;
    }
    try {
      sweep::Trial t = trial_from_json(doc);
      if (filter.matches(t)) out.push_back(std::move(t));
    } catch (const Error& e) {
      bad(line_no, e.what());
    }
  }
  return out;
}

void Store::append_failure(std::string_view run_id, const json& record) const {
  append_line(run_dir(run_id) / kFailures, record.dump(-1, ' ', false, json::error_handler_t::replace) + "\n");
}

std::vector<json> Store::load_failures(std::string_view run_id) const {
  std::vector<json> out;
  fs::path file = run_dir(run_id) / kFailures;
  if (!fs::exists(file)) return out;
  std::istringstream in(read_file(file));
  for (std::string line; std::getline(in, line);) {
    json doc = json::parse(line, nullptr, false);
    if (!doc.is_discarded()) out.push_back(std::move(doc));
  }
  return out;
}

void Store::write_status(std::string_view run_id, const json& status) const {
  write_file_atomic(run_dir(run_id) / kStatus, status.dump(2) + "\n");
}

std::optional<json> Store::load_status(std::string_view run_id) const {
  fs::path file = run_dir(run_id) / kStatus;
  if (!fs::exists(file)) return std::nullopt;
  json doc = json::parse(read_file(file), nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::corrupt, "status of run '" + std::string(run_id) + "' is not valid JSON");
  return doc;
}

}  // namespace mecw::store
