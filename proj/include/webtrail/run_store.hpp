#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace webtrail {

// File names inside a run directory.
namespace run_files {
inline constexpr const char* kRun = "run.json";
inline constexpr const char* kState = "state.json";
inline constexpr const char* kExploration = "exploration.jsonl";
inline constexpr const char* kTasks = "tasks.jsonl";
inline constexpr const char* kRefined = "refined.jsonl";
inline constexpr const char* kDiscards = "discards.jsonl";
inline constexpr const char* kRefineManifest = "refine.json";
inline constexpr const char* kDataset = "dataset.sharegpt.txt";
inline constexpr const char* kDatasetManifest = "dataset.manifest.json";
inline constexpr const char* kLock = ".lock";
inline constexpr const char* kLog = "log.txt";
inline constexpr const char* kOracleCache = "oracle-cache";
}  // namespace run_files

class RunStore {
 public:
  // Creates the directory if needed.
  explicit RunStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }
  bool exists(const std::string& name) const;

  // Write to a temporary sibling then rename. Throws write_failure.
  void write_atomic(const std::string& name, const std::string& content) const;
  void write_json(const std::string& name, const nlohmann::json& value) const;
  void write_jsonl(const std::string& name, const std::vector<nlohmann::json>& records) const;

  std::optional<std::string> read(const std::string& name) const;
  // Throws missing_run_data when absent.
  std::string read_required(const std::string& name) const;
  nlohmann::json read_json(const std::string& name) const;
  std::vector<nlohmann::json> read_jsonl(const std::string& name) const;

 private:
  std::filesystem::path dir_;
};

// Exclusive advisory lock on <dir>/.lock, held for the object's lifetime.
// Throws run_locked when another process holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

// Canonical single-line encoding: sorted keys, no whitespace.
std::string to_jsonl(const std::vector<nlohmann::json>& records);

}  // namespace webtrail
