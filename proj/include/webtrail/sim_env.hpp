#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

#include "webtrail/env.hpp"
#include "webtrail/screenshot.hpp"
#include "webtrail/simulator.hpp"

namespace webtrail {

class SimEnvironment : public Environment {
 public:
  // `store` may be null, in which case image handles are minted but no files
  // are written.
  explicit SimEnvironment(std::shared_ptr<const SiteGraph> graph, std::shared_ptr<ScreenshotStore> store = nullptr);

  // Throws environment_unreachable when the file is missing.
  static std::unique_ptr<SimEnvironment> from_file(const std::filesystem::path& site_file,
                                                   std::shared_ptr<ScreenshotStore> store = nullptr,
                                                   std::optional<int> dynamic_item_count = std::nullopt);

  SessionHandle reset() override;
  void restart(SessionHandle& session) override;
  Observation execute(SessionHandle& session, const Action& action) override;
  Observation observe(const SessionHandle& session) override;
  void close(SessionHandle& session) override;
  std::string backend_name() const override { return "sim"; }

  const Simulator& simulator() const { return sim_; }

 private:
  Observation publish(Observation observation);
  SimState state_of(const SessionHandle& session) const;

  Simulator sim_;
  std::shared_ptr<ScreenshotStore> store_;
  mutable std::mutex mutex_;
  std::map<std::string, SimState> sessions_;
  std::uint64_t next_id_ = 1;
};

}  // namespace webtrail
