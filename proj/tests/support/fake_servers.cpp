#include "support/fake_servers.hpp"

#include <httplib.h>

#include <regex>

#include "webtrail/hash.hpp"
#include "webtrail/screenshot.hpp"

namespace webtrail::testing {

using nlohmann::json;

namespace {

constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

FakeReply w3c_error(int status, const std::string& error, const std::string& message) {
  return {status, json{{"value", {{"error", error}, {"message", message}}}}.dump()};
}

FakeReply w3c_value(const json& value) { return {200, json{{"value", value}}.dump()}; }

}  // namespace

FakeHttpServer::FakeHttpServer() : server_(std::make_unique<httplib::Server>()) {}

FakeHttpServer::~FakeHttpServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void FakeHttpServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

// ---------------------------------------------------------------------------

FakeChatServer::FakeChatServer(Handler handler) : handler_(std::move(handler)) {
  auto serve = [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    {
      std::lock_guard lock(mutex_);
      requests_.push_back(body);
    }
    const FakeReply reply = handler_(body);
    res.status = reply.status;
    res.set_content(reply.body, "application/json");
  };
  server().Post("/v1/chat", serve);
  server().Post("/v1/embed", serve);
  start();
}

std::vector<json> FakeChatServer::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

FakeReply FakeChatServer::text(const std::string& text) { return {200, json{{"text", text}}.dump()}; }

// ---------------------------------------------------------------------------

FakeWebDriver::FakeWebDriver(std::shared_ptr<const SiteGraph> graph) : sim_(std::move(graph)) {
  auto route = [this](const std::string& method) {
    return [this, method](const httplib::Request& req, httplib::Response& res) {
      json body = req.body.empty() ? json::object() : json::parse(req.body, nullptr, false);
      const FakeReply reply = handle(method, req.path, body);
      res.status = reply.status;
      res.set_content(reply.body, "application/json");
    };
  };
  server().Post(".*", route("POST"));
  server().Get(".*", route("GET"));
  server().Delete(".*", route("DELETE"));
  start();
}

std::vector<std::string> FakeWebDriver::commands() const {
  std::lock_guard lock(mutex_);
  return commands_;
}

std::size_t FakeWebDriver::open_sessions() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

void FakeWebDriver::expire_sessions() {
  std::lock_guard lock(mutex_);
  expired_ = true;
}

json FakeWebDriver::snapshot(Session& s) const {
  const Observation o = sim_.observe(s.state);
  json elements = json::array();
  for (const auto& e : o.elements) {
    elements.push_back({{"id", e.element_id},
                        {"text", e.text},
                        {"role", std::string(to_string(e.role))},
                        {"x", e.region.x},
                        {"y", e.region.y},
                        {"width", e.region.width},
                        {"height", e.region.height}});
  }
  return {{"url", o.url}, {"load_id", "load-" + std::to_string(s.load)}, {"elements", elements}, {"html", o.simplified_html}};
}

FakeReply FakeWebDriver::handle(const std::string& method, const std::string& path, const json& body) {
  std::lock_guard lock(mutex_);
  commands_.push_back(method + " " + path);

  if (method == "POST" && path == "/session") {
    const std::string id = "wd-" + std::to_string(next_session_++);
    sessions_[id] = {sim_.initial_state(), next_load_++};
    return w3c_value({{"sessionId", id}, {"capabilities", json::object()}});
  }

  static const std::regex pattern("^/session/([^/]+)(/.*)?$");
  std::smatch m;
  if (!std::regex_match(path, m, pattern)) return w3c_error(404, "unknown command", path);
  const std::string sid = m[1];
  const std::string rest = m[2];
  auto it = sessions_.find(sid);
  if (it == sessions_.end() || expired_) return w3c_error(404, "invalid session id", sid);
  Session& s = it->second;

  auto apply = [&](const Action& a) -> std::optional<FakeReply> {
    try {
      bool reloaded = a.kind == ActionKind::go_to;
      if (a.element_id && (a.kind == ActionKind::click || a.kind == ActionKind::press)) {
        for (const auto& page : sim_.graph().pages) {
          if (page.page_id != s.state.page_id) continue;
          if (const ElementDef* def = page.find(*a.element_id)) {
            const auto kind = def->behavior.kind;
            reloaded = kind == Behavior::Kind::navigate ||
                       (kind == Behavior::Kind::submit && (a.kind == ActionKind::press) == (def->role == ElementRole::textbox));
          }
        }
      }
      s.state = sim_.step(s.state, a).state;
      if (reloaded) s.load = next_load_++;
      return std::nullopt;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::element_not_visible) return w3c_error(404, "no such element", e.what());
      return w3c_error(400, "element not interactable", e.what());
    }
  };

  if (method == "DELETE" && rest.empty()) {
    sessions_.erase(it);
    return w3c_value(nullptr);
  }
  if (method == "DELETE" && rest == "/cookie") return w3c_value(nullptr);
  if (method == "POST" && rest == "/url") {
    if (auto err = apply(Action::go_to(body.at("url").get<std::string>()))) return *err;
    return w3c_value(nullptr);
  }
  if (method == "GET" && rest == "/screenshot") {
    return w3c_value(base64_encode(render_placeholder_png(sim_.observe(s.state))));
  }
  if (method == "POST" && rest == "/execute/sync") {
    const std::string script = body.value("script", "");
    if (script.rfind("/*webtrail-annotate*/", 0) == 0) return w3c_value(snapshot(s));
    if (script.find("scrollBy") != std::string::npos) return w3c_value(nullptr);
    if (script.find("options") != std::string::npos) {
      const std::string ref = body.at("args").at(0).at(kElementKey);
      if (auto err = apply(Action::select_option(ref, body.at("args").at(1).get<std::string>()))) return w3c_value(false);
      return w3c_value(true);
    }
    return w3c_error(500, "javascript error", "unsupported script");
  }
  if (method == "POST" && rest == "/element") {
    static const std::regex css("^\\[data-webtrail-id=\"(.*)\"\\]$");
    std::smatch cm;
    const std::string selector = body.value("value", "");
    if (!std::regex_match(selector, cm, css)) return w3c_error(400, "invalid selector", selector);
    const std::string id = cm[1];
    for (const auto* e : sim_.visible_elements(s.state)) {
      if (e->element_id == id) return w3c_value({{kElementKey, id}});
    }
    return w3c_error(404, "no such element", id);
  }

  static const std::regex element_cmd("^/element/([^/]+)/(click|clear|value|selected)$");
  std::smatch em;
  if (std::regex_match(rest, em, element_cmd)) {
    const std::string id = em[1];
    const std::string verb = em[2];
    if (verb == "clear") return w3c_value(nullptr);
    if (verb == "selected") return w3c_value(s.state.checked.contains(id));
    if (verb == "click") {
      if (auto err = apply(Action::click(id))) return *err;
      return w3c_value(nullptr);
    }
    const std::string text = body.value("text", "");
    const Action a = text == "\xEE\x80\x87" ? Action::press(id, "Enter") : Action::fill(id, text);
    if (auto err = apply(a)) return *err;
    return w3c_value(nullptr);
  }
  return w3c_error(404, "unknown command", method + " " + path);
}

}  // namespace webtrail::testing
