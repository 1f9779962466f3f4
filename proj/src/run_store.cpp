#include "webtrail/run_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "webtrail/error.hpp"

namespace webtrail {

RunStore::RunStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::write_failure, "cannot create run directory " + dir_.string() + ": " + ec.message());
}

bool RunStore::exists(const std::string& name) const { return std::filesystem::exists(path(name)); }

void RunStore::write_atomic(const std::string& name, const std::string& content) const {
  const auto target = path(name);
  const auto tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::write_failure, "cannot write " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorCode::write_failure, "cannot replace " + target.string() + ": " + ec.message());
}

void RunStore::write_json(const std::string& name, const nlohmann::json& value) const {
  write_atomic(name, value.dump(2) + "\n");
}

void RunStore::write_jsonl(const std::string& name, const std::vector<nlohmann::json>& records) const {
  write_atomic(name, to_jsonl(records));
}

std::optional<std::string> RunStore::read(const std::string& name) const {
  std::ifstream in(path(name), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string RunStore::read_required(const std::string& name) const {
  auto content = read(name);
  if (!content) throw Error(ErrorCode::missing_run_data, path(name).string() + " does not exist");
  return *content;
}

nlohmann::json RunStore::read_json(const std::string& name) const {
  try {
    return nlohmann::json::parse(read_required(name));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, path(name).string() + ": " + e.what());
  }
}

std::vector<nlohmann::json> RunStore::read_jsonl(const std::string& name) const {
  std::vector<nlohmann::json> records;
  std::istringstream in(read_required(name));
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::parse_error, path(name).string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return records;
}

std::string to_jsonl(const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

RunLock::RunLock(const std::filesystem::path& dir) {
  const auto file = (dir / run_files::kLock).string();
  fd_ = ::open(file.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error(ErrorCode::write_failure, "cannot open " + file);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::run_locked, dir.string() + " is in use by another process");
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace webtrail
