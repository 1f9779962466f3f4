#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>

#include <nlohmann/json.hpp>

#include "webtrail/chat_client.hpp"
#include "webtrail/oracle.hpp"
#include "webtrail/screenshot.hpp"

namespace webtrail {

struct OracleRequest {
  PromptId prompt_id = PromptId::discover;
  std::string text;
  std::vector<std::string> images;  // image handles

  // Image count must match prompt_image_count(prompt_id).
  std::optional<std::string> violation() const;
};

struct RemoteOracleConfig {
  ChatEndpoint endpoint;
  std::optional<std::filesystem::path> cache_dir;
  int max_in_flight = 4;
  int schema_retries = 2;
};

// Oracle backed by a remote multimodal model, prompted with the built-in
// templates. Replies are schema-checked; a malformed reply is re-asked up to
// `schema_retries` times before schema_violation is raised.
class RemoteOracle : public Oracle {
 public:
  static constexpr int kMaxInFlightLimit = 64;
  static constexpr const char* kSchemaReminder =
      "Your previous response did not comply with the required JSON schema. Respond with valid schema only.";

  RemoteOracle(RemoteOracleConfig config, std::shared_ptr<ScreenshotStore> images);

  std::string name() const override { return "remote"; }

  // Sends one request and returns the validated JSON reply. `validate` throws
  // schema_violation (or any json exception) on a malformed reply.
  nlohmann::json ask(const OracleRequest& request, const std::function<void(const nlohmann::json&)>& validate);

 protected:
  std::vector<SimpleTask> do_discover(const Observation& o, const std::vector<SimpleTask>& observed) override;
  std::vector<SimpleTask> do_discover_differential(const Observation& before, const Observation& after) override;
  VisualVerdict do_visual_change(const Observation& before, const Observation& after) override;
  std::vector<SimpleTask> do_categorize(const Observation& o, const std::vector<SimpleTask>& tasks) override;
  std::vector<SimpleTask> do_info_seeking(const Observation& o, const std::vector<Action>& history) override;
  SynthesisDraft do_synthesize(const SynthesisInput& input) override;

 private:
  std::optional<std::string> cache_lookup(const std::string& key) const;
  void cache_store(const std::string& key, const std::string& reply) const;

  RemoteOracleConfig config_;
  std::shared_ptr<ScreenshotStore> images_;
  ChatClient chat_;
  std::counting_semaphore<kMaxInFlightLimit> in_flight_;
};

// Wire helpers shared with tests.
nlohmann::json tasks_to_wire(const std::vector<SimpleTask>& tasks, const Observation& o);
std::vector<SimpleTask> tasks_from_wire(const nlohmann::json& task_list);
std::string extract_json_text(std::string_view reply);

}  // namespace webtrail
