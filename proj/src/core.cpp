#include "webtrail/core.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>
#include <utility>

#include "webtrail/hash.hpp"

namespace webtrail {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<ActionKind, std::string_view>, 10> kActionNames{{
    {ActionKind::go_to, "goto"},
    {ActionKind::click, "click"},
    {ActionKind::fill, "fill"},
    {ActionKind::press, "press"},
    {ActionKind::select_option, "selectoption"},
    {ActionKind::check, "check"},
    {ActionKind::uncheck, "uncheck"},
    {ActionKind::stop, "stop"},
    {ActionKind::scroll_up, "scroll_up"},
    {ActionKind::scroll_down, "scroll_down"},
}};

constexpr std::array<std::pair<ElementRole, std::string_view>, 7> kRoleNames{{
    {ElementRole::link, "link"},
    {ElementRole::button, "button"},
    {ElementRole::textbox, "textbox"},
    {ElementRole::select, "select"},
    {ElementRole::checkbox, "checkbox"},
    {ElementRole::menu_toggle, "menu_toggle"},
    {ElementRole::other, "other"},
}};

bool takes_element(ActionKind kind) {
  switch (kind) {
    case ActionKind::click:
    case ActionKind::fill:
    case ActionKind::press:
    case ActionKind::select_option:
    case ActionKind::check:
    case ActionKind::uncheck:
      return true;
    default:
      return false;
  }
}

std::size_t input_arity(ActionKind kind) {
  switch (kind) {
    case ActionKind::go_to:
    case ActionKind::fill:
    case ActionKind::press:
    case ActionKind::select_option:
      return 1;
    default:
      return 0;
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

void append_bracketed(std::string& out, std::string_view value) {
  out += " [";
  for (char c : value) {
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    if (c == ']' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back(']');
}

template <typename T>
T require_field(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::parse_error, std::string("missing field '") + key + "'");
  return j.at(key).get<T>();
}

void expect(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::parse_error, message);
}

}  // namespace

// ---------------------------------------------------------------------------
// Actions

std::string_view to_string(ActionKind kind) {
  for (const auto& [k, name] : kActionNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<ActionKind> parse_action_kind(std::string_view name) {
  std::string key = lower(name);
  for (const auto& [k, n] : kActionNames) {
    if (n == key) return k;
  }
  return std::nullopt;
}

bool is_exploration_action(ActionKind kind) {
  return kind != ActionKind::scroll_up && kind != ActionKind::scroll_down;
}

Action Action::go_to(std::string url) { return {ActionKind::go_to, std::nullopt, {std::move(url)}}; }
Action Action::click(std::string id) { return {ActionKind::click, std::move(id), {}}; }
Action Action::fill(std::string id, std::string text) {
  return {ActionKind::fill, std::move(id), {std::move(text)}};
}
Action Action::press(std::string id, std::string key) {
  return {ActionKind::press, std::move(id), {std::move(key)}};
}
Action Action::select_option(std::string id, std::string option) {
  return {ActionKind::select_option, std::move(id), {std::move(option)}};
}
Action Action::check(std::string id) { return {ActionKind::check, std::move(id), {}}; }
Action Action::uncheck(std::string id) { return {ActionKind::uncheck, std::move(id), {}}; }
Action Action::stop() { return {ActionKind::stop, std::nullopt, {}}; }
Action Action::scroll_down() { return {ActionKind::scroll_down, std::nullopt, {}}; }
Action Action::scroll_up() { return {ActionKind::scroll_up, std::nullopt, {}}; }

ActionVerdict validate_action(const Action& action) {
  const std::string kind(to_string(action.kind));
  const bool has_element = action.element_id.has_value() && !action.element_id->empty();
  if (takes_element(action.kind)) {
    if (!has_element) return {false, kind + " requires an element"};
  } else if (action.element_id.has_value()) {
    return {false, kind + " takes no element"};
  }
  const std::size_t arity = input_arity(action.kind);
  if (action.inputs.size() != arity) {
    if (arity == 0) return {false, kind + " takes no input"};
    return {false, kind + " requires one input"};
  }
  return {};
}

std::string format_action(const Action& action) {
  std::string out(to_string(action.kind));
  if (action.element_id) append_bracketed(out, *action.element_id);
  for (const auto& input : action.inputs) append_bracketed(out, input);
  return out;
}

Action parse_action_text(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] != ' ') ++pos;
  auto kind = parse_action_kind(text.substr(0, pos));
  if (!kind) throw Error(ErrorCode::parse_error, "unknown action kind in '" + std::string(text) + "'");

  std::vector<std::string> groups;
  while (pos < text.size()) {
    if (text[pos] == ' ') {
      ++pos;
      continue;
    }
    if (text[pos] != '[') throw Error(ErrorCode::parse_error, "expected '[' in '" + std::string(text) + "'");
    ++pos;
    std::string value;
    bool closed = false;
    while (pos < text.size()) {
      char c = text[pos++];
      if (c == '\\' && pos < text.size()) {
        const char escaped = text[pos++];
        value.push_back(escaped == 'n' ? '\n' : escaped);
      } else if (c == ']') {
        closed = true;
        break;
      } else {
        value.push_back(c);
      }
    }
    if (!closed) throw Error(ErrorCode::parse_error, "unterminated '[' in '" + std::string(text) + "'");
    groups.push_back(std::move(value));
  }

  Action action;
  action.kind = *kind;
  std::size_t first_input = 0;
  if (takes_element(*kind) && !groups.empty()) {
    action.element_id = groups.front();
    first_input = 1;
  }
  action.inputs.assign(groups.begin() + static_cast<std::ptrdiff_t>(first_input), groups.end());
  if (auto verdict = validate_action(action); !verdict) throw Error(ErrorCode::parse_error, verdict.violation);
  return action;
}

// ---------------------------------------------------------------------------
// Observations

std::string_view to_string(ElementRole role) {
  for (const auto& [r, name] : kRoleNames) {
    if (r == role) return name;
  }
  return "other";
}

std::optional<ElementRole> parse_element_role(std::string_view name) {
  for (const auto& [r, n] : kRoleNames) {
    if (n == name) return r;
  }
  return std::nullopt;
}

const ObservedElement* Observation::find(std::string_view element_id) const {
  for (const auto& element : elements) {
    if (element.element_id == element_id) return &element;
  }
  return nullptr;
}

std::optional<std::string> validate_observation(const Observation& observation) {
  std::set<std::string_view> ids;
  for (const auto& element : observation.elements) {
    if (!ids.insert(element.element_id).second) return "duplicate element_id '" + element.element_id + "'";
  }
  // Every id="..." attribute in the markup must name a listed element.
  const std::string_view html = observation.simplified_html;
  std::size_t pos = 0;
  while ((pos = html.find(" id=\"", pos)) != std::string_view::npos) {
    pos += 5;
    std::size_t end = html.find('"', pos);
    if (end == std::string_view::npos) return std::string("unterminated id attribute");
    std::string_view id = html.substr(pos, end - pos);
    if (!ids.contains(id)) return "markup references unknown element '" + std::string(id) + "'";
    pos = end;
  }
  return std::nullopt;
}

std::string normalize_url(std::string_view url) {
  std::string_view rest = url;
  std::string out;
  if (auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);

  std::string_view query;
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    query = rest.substr(q + 1);
    rest = rest.substr(0, q);
  }

  if (auto sep = rest.find("://"); sep != std::string_view::npos) {
    out = lower(rest.substr(0, sep)) + "://";
    rest = rest.substr(sep + 3);
    auto slash = rest.find('/');
    out += lower(rest.substr(0, slash));
    out += slash == std::string_view::npos ? std::string("/") : std::string(rest.substr(slash));
  } else {
    out = std::string(rest);
  }

  if (!query.empty()) {
    std::vector<std::string> params;
    std::size_t start = 0;
    while (start <= query.size()) {
      auto amp = query.find('&', start);
      auto piece = query.substr(start, amp == std::string_view::npos ? std::string_view::npos : amp - start);
      if (!piece.empty()) params.emplace_back(piece);
      if (amp == std::string_view::npos) break;
      start = amp + 1;
    }
    std::sort(params.begin(), params.end());
    if (!params.empty()) {
      out += '?';
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (i) out += '&';
        out += params[i];
      }
    }
  }
  return out;
}

std::string page_identity(std::string_view url, std::span<const ObservedElement> elements_at_load) {
  std::map<std::string_view, int> roles;
  for (const auto& element : elements_at_load) ++roles[to_string(element.role)];
  std::string canonical;
  for (const auto& [role, count] : roles) {
    canonical += role;
    canonical += ':';
    canonical += std::to_string(count);
    canonical += ';';
  }
  return normalize_url(url) + "#" + sha256_hex(canonical).substr(0, 12);
}

std::string identity_url(std::string_view identity) {
  auto hash = identity.rfind('#');
  return std::string(identity.substr(0, hash));
}

// ---------------------------------------------------------------------------
// Tasks and tuples

std::string_view to_string(TaskCategory category) {
  switch (category) {
    case TaskCategory::unclassified: return "unclassified";
    case TaskCategory::fixed: return "fixed";
    case TaskCategory::dynamic: return "dynamic";
  }
  return "unclassified";
}

std::string_view to_string(TupleKind kind) {
  return kind == TupleKind::action_oriented ? "action_oriented" : "info_seeking";
}

std::optional<std::string> validate_simple_task(const SimpleTask& task) {
  // Information-seeking asks carry no actions of their own.
  if (task.action_sequence.empty() && !task.info_seeking) return std::string("empty action_sequence");
  bool any_fill = false;
  for (const auto& action : task.action_sequence) {
    if (auto verdict = validate_action(action); !verdict) return verdict.violation;
    if (!is_exploration_action(action.kind)) return "'" + std::string(to_string(action.kind)) + "' is not an exploration action";
    any_fill = any_fill || action.kind == ActionKind::fill;
  }
  if (any_fill && task.action_sequence.back().kind == ActionKind::fill) return std::string("task ends with a fill action");
  if (task.group_number.has_value() != (task.category == TaskCategory::dynamic))
    return std::string("group_number must be present iff category is dynamic");
  return std::nullopt;
}

std::vector<Action> Trajectory::actions() const {
  std::vector<Action> out;
  out.reserve(steps.size());
  for (const auto& step : steps) out.push_back(step.action);
  return out;
}

std::optional<std::string> validate_task_tuple(const TaskTuple& tuple) {
  if (tuple.completeness_score < 1 || tuple.completeness_score > 5)
    return "completeness_score " + std::to_string(tuple.completeness_score) + " outside 1..5";
  if (!tuple.refined && tuple.kind == TupleKind::action_oriented &&
      tuple.trajectory.size() < static_cast<std::size_t>(kMinActionOrientedActions))
    return std::string("action-oriented tuple with fewer than 3 actions");
  for (const auto& step : tuple.trajectory.steps) {
    if (auto verdict = validate_action(step.action); !verdict) return verdict.violation;
  }
  return std::nullopt;
}

QueueEntry make_queue_entry(std::string page_id, std::vector<Action> trace) {
  QueueEntry entry{std::move(page_id), std::move(trace), 0};
  entry.depth = entry.trace.size();
  return entry;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, const Action& a) {
  j = json{{"kind", to_string(a.kind)}, {"inputs", a.inputs}};
  j["element_id"] = a.element_id ? json(*a.element_id) : json(nullptr);
}

void from_json(const json& j, Action& a) {
  auto kind = parse_action_kind(require_field<std::string>(j, "kind"));
  expect(kind.has_value(), "unknown action kind");
  a.kind = *kind;
  a.element_id.reset();
  if (j.contains("element_id") && !j.at("element_id").is_null()) a.element_id = j.at("element_id").get<std::string>();
  a.inputs = j.value("inputs", std::vector<std::string>{});
  auto verdict = validate_action(a);
  expect(verdict.valid, verdict.violation);
}

void to_json(json& j, const Region& r) {
  j = json{{"x", r.x}, {"y", r.y}, {"width", r.width}, {"height", r.height}};
}

void from_json(const json& j, Region& r) {
  r.x = require_field<int>(j, "x");
  r.y = require_field<int>(j, "y");
  r.width = require_field<int>(j, "width");
  r.height = require_field<int>(j, "height");
}

void to_json(json& j, const ObservedElement& e) {
  j = json{{"element_id", e.element_id}, {"text", e.text}, {"role", to_string(e.role)}, {"region", e.region}};
}

void from_json(const json& j, ObservedElement& e) {
  e.element_id = require_field<std::string>(j, "element_id");
  e.text = require_field<std::string>(j, "text");
  auto role = parse_element_role(require_field<std::string>(j, "role"));
  expect(role.has_value(), "unknown element role");
  e.role = *role;
  e.region = j.value("region", Region{});
}

void to_json(json& j, const Observation& o) {
  j = json{{"page_id", o.page_id},
           {"url", o.url},
           {"screenshot", o.screenshot},
           {"elements", o.elements},
           {"simplified_html", o.simplified_html}};
}

void from_json(const json& j, Observation& o) {
  o.page_id = require_field<std::string>(j, "page_id");
  o.url = require_field<std::string>(j, "url");
  o.screenshot = j.value("screenshot", std::string{});
  o.elements = require_field<std::vector<ObservedElement>>(j, "elements");
  o.simplified_html = j.value("simplified_html", std::string{});
  auto violation = validate_observation(o);
  expect(!violation, violation.value_or(""));
}

void to_json(json& j, const SimpleTask& t) {
  j = json{{"title", t.title},
           {"is_allowed", t.is_allowed},
           {"action_sequence", t.action_sequence},
           {"origin_page", t.origin_page},
           {"category", to_string(t.category)},
           {"info_seeking", t.info_seeking}};
  j["group_number"] = t.group_number ? json(*t.group_number) : json(nullptr);
}

void from_json(const json& j, SimpleTask& t) {
  t.title = require_field<std::string>(j, "title");
  t.is_allowed = j.value("is_allowed", true);
  t.action_sequence = j.value("action_sequence", std::vector<Action>{});
  t.origin_page = j.value("origin_page", std::string{});
  const std::string category = j.value("category", std::string("unclassified"));
  if (category == "fixed") {
    t.category = TaskCategory::fixed;
  } else if (category == "dynamic") {
    t.category = TaskCategory::dynamic;
  } else {
    expect(category == "unclassified", "unknown task category '" + category + "'");
    t.category = TaskCategory::unclassified;
  }
  t.group_number.reset();
  if (j.contains("group_number") && !j.at("group_number").is_null()) t.group_number = j.at("group_number").get<int>();
  t.info_seeking = j.value("info_seeking", false);
  auto violation = validate_simple_task(t);
  expect(!violation, violation.value_or(""));
}

void to_json(json& j, const TrajectoryStep& s) {
  j = json{{"observation", s.observation}, {"action", s.action}, {"reasoning", s.reasoning}};
}

void from_json(const json& j, TrajectoryStep& s) {
  s.observation = require_field<Observation>(j, "observation");
  s.action = require_field<Action>(j, "action");
  s.reasoning = j.value("reasoning", std::string{});
}

void to_json(json& j, const Trajectory& t) {
  j = json{{"steps", t.steps}, {"final_observation", t.final_observation}, {"final_reasoning", t.final_reasoning}};
}

void from_json(const json& j, Trajectory& t) {
  t.steps = require_field<std::vector<TrajectoryStep>>(j, "steps");
  t.final_observation = require_field<Observation>(j, "final_observation");
  t.final_reasoning = j.value("final_reasoning", std::string{});
}

void to_json(json& j, const TaskTuple& t) {
  j = json{{"description", t.description},
           {"trajectory", t.trajectory},
           {"kind", to_string(t.kind)},
           {"completeness_score", t.completeness_score},
           {"refined", t.refined},
           {"original_description", t.original_description}};
}

void from_json(const json& j, TaskTuple& t) {
  t.description = require_field<std::string>(j, "description");
  t.trajectory = require_field<Trajectory>(j, "trajectory");
  const std::string kind = require_field<std::string>(j, "kind");
  expect(kind == "action_oriented" || kind == "info_seeking", "unknown tuple kind '" + kind + "'");
  t.kind = kind == "action_oriented" ? TupleKind::action_oriented : TupleKind::info_seeking;
  t.completeness_score = require_field<int>(j, "completeness_score");
  t.refined = j.value("refined", false);
  t.original_description = j.value("original_description", std::string{});
  auto violation = validate_task_tuple(t);
  expect(!violation, violation.value_or(""));
}

void to_json(json& j, const QueueEntry& e) {
  j = json{{"page_id", e.page_id}, {"trace", e.trace}, {"depth", e.depth}};
}

void from_json(const json& j, QueueEntry& e) {
  e.page_id = require_field<std::string>(j, "page_id");
  e.trace = require_field<std::vector<Action>>(j, "trace");
  e.depth = require_field<std::size_t>(j, "depth");
  expect(e.depth == e.trace.size(), "queue entry depth must equal trace length");
}

}  // namespace webtrail
