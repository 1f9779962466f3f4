#include "webtrail/webdriver_env.hpp"

#include <spdlog/spdlog.h>

#include "webtrail/hash.hpp"

namespace webtrail {
namespace {

using nlohmann::json;

constexpr const char* kElementKey = "element-6066-11e4-a52e-4f735466cecf";

std::string key_code(const std::string& key) {
  static const std::map<std::string, std::string> codes{
      {"Enter", "\xEE\x80\x87"},      // U+E007
      {"Tab", "\xEE\x80\x84"},        // U+E004
      {"Escape", "\xEE\x80\x8C"},     // U+E00C
      {"Backspace", "\xEE\x80\x83"},  // U+E003
  };
  auto it = codes.find(key);
  return it == codes.end() ? key : it->second;
}

ErrorCode classify(const std::string& error) {
  if (error == "no such element" || error == "stale element reference") return ErrorCode::element_not_found;
  if (error == "element not interactable" || error == "element click intercepted" || error == "invalid element state")
    return ErrorCode::action_not_applicable;
  if (error == "invalid session id") return ErrorCode::session_closed;
  if (error == "timeout" || error == "script timeout") return ErrorCode::navigation_timeout;
  return ErrorCode::action_not_applicable;
}

ElementRole role_from(const std::string& name) { return parse_element_role(name).value_or(ElementRole::other); }

}  // namespace

const std::string& WebDriverEnvironment::annotate_script() {
  static const std::string script = std::string(kAnnotateMarker) + R"JS(
const sel = 'a[href], button, input, select, textarea, [role=button], [role=link], [aria-expanded]';
window.__webtrailNext = window.__webtrailNext || 1;
if (!window.__webtrailLoad) window.__webtrailLoad = String(performance.timeOrigin) + ':' + Math.random();
const roleOf = (el) => {
  const tag = el.tagName.toLowerCase();
  if (el.hasAttribute('aria-expanded')) return 'menu_toggle';
  if (tag === 'a' || el.getAttribute('role') === 'link') return 'link';
  if (tag === 'select') return 'select';
  if (tag === 'textarea') return 'textbox';
  if (tag === 'input') {
    const t = (el.getAttribute('type') || 'text').toLowerCase();
    if (t === 'checkbox' || t === 'radio') return 'checkbox';
    if (t === 'submit' || t === 'button' || t === 'reset') return 'button';
    return 'textbox';
  }
  return 'button';
};
const esc = (s) => String(s).replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;').replace(/"/g, '&quot;');
const elements = [];
const lines = [];
for (const el of document.querySelectorAll(sel)) {
  const r = el.getBoundingClientRect();
  if (r.width <= 0 || r.height <= 0 || r.bottom < 0 || r.top > window.innerHeight) continue;
  const style = window.getComputedStyle(el);
  if (style.visibility === 'hidden' || style.display === 'none') continue;
  if (!el.dataset.webtrailId) el.dataset.webtrailId = String(window.__webtrailNext++);
  const id = el.dataset.webtrailId;
  const text = (el.innerText || el.value || el.getAttribute('aria-label') || el.getAttribute('placeholder') ||
                el.getAttribute('title') || '').trim().replace(/\s+/g, ' ').slice(0, 120);
  const role = roleOf(el);
  elements.push({id, text, role, x: Math.round(r.left), y: Math.round(r.top),
                 width: Math.round(r.width), height: Math.round(r.height)});
  lines.push('<' + el.tagName.toLowerCase() + ' id="' + id + '" role="' + role + '">' + esc(text) + '</' +
             el.tagName.toLowerCase() + '>');
}
return {url: location.href, load_id: window.__webtrailLoad, elements,
        html: '<body>\n' + lines.join('\n') + (lines.length ? '\n' : '') + '</body>'};
)JS";
  return script;
}

WebDriverEnvironment::WebDriverEnvironment(WebDriverConfig config, std::shared_ptr<ScreenshotStore> store)
    : config_(std::move(config)),
      store_(std::move(store)),
      http_(config_.endpoint, ErrorCode::navigation_timeout, config_.timeout) {
  if (config_.seed_url.empty()) throw Error(ErrorCode::invalid_argument, "live backend requires a seed URL");
}

json WebDriverEnvironment::command(const std::string& method, const std::string& path, const json& body) {
  HttpResponse response;
  for (int attempt = 0;; ++attempt) {
    try {
      std::lock_guard lock(http_mutex_);
      if (method == "GET") {
        response = http_.get(path);
      } else if (method == "DELETE") {
        response = http_.del(path);
      } else {
        response = http_.post_json(path, body.dump());
      }
      break;
    } catch (const Error& e) {
      if (attempt >= config_.retries) throw;
      spdlog::warn("webdriver {} {} failed ({}), retrying", method, path, e.what());
    }
  }
  json reply;
  try {
    reply = json::parse(response.body);
  } catch (const json::exception&) {
    throw Error(ErrorCode::environment_unreachable,
                "webdriver returned non-JSON (status " + std::to_string(response.status) + ")");
  }
  const json value = reply.value("value", json());
  if (response.status >= 400 || (value.is_object() && value.contains("error"))) {
    const std::string error = value.is_object() ? value.value("error", std::string("unknown error")) : "unknown error";
    const std::string message = value.is_object() ? value.value("message", std::string()) : std::string();
    throw Error(classify(error), error + ": " + message);
  }
  return value;
}

void WebDriverEnvironment::navigate(const std::string& sid, const std::string& url) {
  command("POST", "/session/" + sid + "/url", {{"url", url}});
}

std::string WebDriverEnvironment::find_element(const std::string& sid, const std::string& element_id) {
  const json value = command("POST", "/session/" + sid + "/element",
                             {{"using", "css selector"}, {"value", "[data-webtrail-id=\"" + element_id + "\"]"}});
  if (!value.is_object() || !value.contains(kElementKey))
    throw Error(ErrorCode::element_not_found, "element '" + element_id + "' not found");
  return value.at(kElementKey).get<std::string>();
}

Observation WebDriverEnvironment::snapshot(const std::string& sid) {
  const json page = command("POST", "/session/" + sid + "/execute/sync", {{"script", annotate_script()}, {"args", json::array()}});
  Observation o;
  o.url = normalize_url(page.at("url").get<std::string>());
  for (const auto& e : page.at("elements")) {
    o.elements.push_back({e.at("id").get<std::string>(), e.value("text", std::string()), role_from(e.value("role", "")),
                          {e.value("x", 0), e.value("y", 0), e.value("width", 0), e.value("height", 0)}});
  }
  o.simplified_html = page.value("html", std::string());

  const std::string load_id = page.value("load_id", std::string());
  {
    std::lock_guard lock(mutex_);
    auto& tracked = tracked_[sid];
    if (tracked.identity.empty() || tracked.load_id != load_id) {
      tracked.load_id = load_id;
      tracked.identity = page_identity(o.url, o.elements);
    }
    o.page_id = tracked.identity;
  }

  const std::string png = base64_decode(command("GET", "/session/" + sid + "/screenshot").get<std::string>());
  o.screenshot = store_ ? store_->put_bytes(png) : "images/" + sha256_hex(png).substr(0, 16) + ".png";
  return o;
}

SessionHandle WebDriverEnvironment::reset() {
  json value;
  try {
    value = command("POST", "/session",
                    {{"capabilities", {{"alwaysMatch", {{"browserName", config_.browser}}}}}});
  } catch (const Error& e) {
    throw Error(ErrorCode::environment_unreachable, std::string("cannot open webdriver session: ") + e.what());
  }
  SessionHandle session;
  session.session_id = value.at("sessionId").get<std::string>();
  restart(session);
  return session;
}

void WebDriverEnvironment::restart(SessionHandle& session) {
  {
    std::lock_guard lock(mutex_);
    tracked_[session.session_id] = {};
  }
  command("DELETE", "/session/" + session.session_id + "/cookie");
  navigate(session.session_id, config_.seed_url);
  session.page_id = snapshot(session.session_id).page_id;
}

Observation WebDriverEnvironment::execute(SessionHandle& session, const Action& action) {
  if (auto verdict = validate_action(action); !verdict) throw Error(ErrorCode::invalid_argument, verdict.violation);
  const std::string& sid = session.session_id;
  const std::string base = "/session/" + sid;
  auto element_path = [&] { return base + "/element/" + find_element(sid, *action.element_id); };

  switch (action.kind) {
    case ActionKind::go_to:
      navigate(sid, action.inputs.front());
      break;
    case ActionKind::click:
      command("POST", element_path() + "/click");
      break;
    case ActionKind::fill: {
      const auto path = element_path();
      command("POST", path + "/clear");
      command("POST", path + "/value", {{"text", action.inputs.front()}});
      break;
    }
    case ActionKind::press:
      command("POST", element_path() + "/value", {{"text", key_code(action.inputs.front())}});
      break;
    case ActionKind::select_option: {
      const auto ref = find_element(sid, *action.element_id);
      const json found = command(
          "POST", base + "/execute/sync",
          {{"script",
            "const [el, label] = arguments; const opt = Array.from(el.options || []).find(o => o.text.trim() === label);"
            " if (!opt) return false; el.value = opt.value;"
            " el.dispatchEvent(new Event('change', {bubbles: true})); return true;"},
           {"args", json::array({json{{kElementKey, ref}}, action.inputs.front()})}});
      if (found != true) throw Error(ErrorCode::action_not_applicable, "option '" + action.inputs.front() + "' not found");
      break;
    }
    case ActionKind::check:
    case ActionKind::uncheck: {
      const auto path = element_path();
      const bool selected = command("GET", path + "/selected").get<bool>();
      if (selected != (action.kind == ActionKind::check)) command("POST", path + "/click");
      break;
    }
    case ActionKind::scroll_up:
    case ActionKind::scroll_down:
      command("POST", base + "/execute/sync",
              {{"script", action.kind == ActionKind::scroll_down ? "window.scrollBy(0, window.innerHeight * 0.8);"
                                                                 : "window.scrollBy(0, -window.innerHeight * 0.8);"},
               {"args", json::array()}});
      break;
    case ActionKind::stop:
      break;
  }
  Observation o = snapshot(sid);
  session.page_id = o.page_id;
  ++session.steps;
  return o;
}

Observation WebDriverEnvironment::observe(const SessionHandle& session) { return snapshot(session.session_id); }

void WebDriverEnvironment::close(SessionHandle& session) {
  {
    std::lock_guard lock(mutex_);
    if (!tracked_.erase(session.session_id)) return;
  }
  command("DELETE", "/session/" + session.session_id);
}

}  // namespace webtrail
