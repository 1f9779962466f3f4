#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "webtrail/env.hpp"
#include "webtrail/http.hpp"
#include "webtrail/screenshot.hpp"

namespace webtrail {

struct WebDriverConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:4444
  std::string seed_url;
  std::chrono::milliseconds timeout = std::chrono::seconds(30);
  int retries = 1;
  std::string browser = "chrome";
};

// Live backend speaking the W3C WebDriver protocol. Interactive elements are
// annotated in-page with a data-webtrail-id attribute by an injected script,
// which also returns the simplified markup.
class WebDriverEnvironment : public Environment {
 public:
  WebDriverEnvironment(WebDriverConfig config, std::shared_ptr<ScreenshotStore> store);

  SessionHandle reset() override;
  void restart(SessionHandle& session) override;
  Observation execute(SessionHandle& session, const Action& action) override;
  Observation observe(const SessionHandle& session) override;
  void close(SessionHandle& session) override;
  std::string backend_name() const override { return "live"; }

  // Marker comment the annotation script starts with.
  static constexpr const char* kAnnotateMarker = "/*webtrail-annotate*/";
  static const std::string& annotate_script();

 private:
  struct Tracked {
    std::string load_id;
    std::string identity;
  };

  nlohmann::json command(const std::string& method, const std::string& path,
                         const nlohmann::json& body = nlohmann::json::object());
  std::string find_element(const std::string& sid, const std::string& element_id);
  Observation snapshot(const std::string& sid);
  void navigate(const std::string& sid, const std::string& url);

  WebDriverConfig config_;
  std::shared_ptr<ScreenshotStore> store_;
  std::mutex http_mutex_;
  HttpClient http_;
  std::mutex mutex_;
  std::map<std::string, Tracked> tracked_;
};

}  // namespace webtrail
