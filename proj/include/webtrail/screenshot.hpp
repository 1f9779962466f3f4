#pragma once

#include <filesystem>
#include <mutex>
#include <string>

#include "webtrail/core.hpp"

namespace webtrail {

// Deterministic placeholder image for a simulated observation: one filled
// rectangle per element region, colored by role. Returns PNG bytes.
std::string render_placeholder_png(const Observation& observation);

// Content-addressed image directory. Handles are paths relative to the run
// directory ("images/<hash>.png").
class ScreenshotStore {
 public:
  explicit ScreenshotStore(std::filesystem::path run_dir);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path_of(const std::string& handle) const { return root_ / handle; }
  bool contains(const std::string& handle) const;

  // Writes `png` under `handle` unless already present.
  void put(const std::string& handle, const std::string& png);

  // Stores raw PNG bytes under a handle derived from their hash.
  std::string put_bytes(const std::string& png);

  std::string read(const std::string& handle) const;

 private:
  std::filesystem::path root_;
  std::mutex mutex_;
};

}  // namespace webtrail
