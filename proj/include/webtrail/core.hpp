#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "webtrail/error.hpp"

namespace webtrail {

// ---------------------------------------------------------------------------
// Actions
// ---------------------------------------------------------------------------

// The first eight kinds form the exploration action space. The scroll kinds
// are only ever chosen by the refinement agent.
enum class ActionKind {
  go_to,
  click,
  fill,
  press,
  select_option,
  check,
  uncheck,
  stop,
  scroll_up,
  scroll_down,
};

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> parse_action_kind(std::string_view name);
bool is_exploration_action(ActionKind kind);

struct Action {
  ActionKind kind = ActionKind::stop;
  std::optional<std::string> element_id;
  // URL for goto, text for fill, key name for press, option label for
  // selectoption; empty otherwise.
  std::vector<std::string> inputs;

  static Action go_to(std::string url);
  static Action click(std::string element_id);
  static Action fill(std::string element_id, std::string text);
  static Action press(std::string element_id, std::string key);
  static Action select_option(std::string element_id, std::string option);
  static Action check(std::string element_id);
  static Action uncheck(std::string element_id);
  static Action stop();
  static Action scroll_down();
  static Action scroll_up();

  bool operator==(const Action&) const = default;
};

struct ActionVerdict {
  bool valid = true;
  std::string violation;

  explicit operator bool() const { return valid; }
};

ActionVerdict validate_action(const Action& action);

// Single-line textual form used in prompts, hints and SFT records:
//   click [nav-forums]   fill [name] [My forum]   goto [sim://x/home]   stop
// `]` and `\` inside brackets are backslash-escaped; a newline becomes `\n`.
std::string format_action(const Action& action);
Action parse_action_text(std::string_view text);

// ---------------------------------------------------------------------------
// Observations
// ---------------------------------------------------------------------------

enum class ElementRole { link, button, textbox, select, checkbox, menu_toggle, other };

std::string_view to_string(ElementRole role);
std::optional<ElementRole> parse_element_role(std::string_view name);

struct Region {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  bool operator==(const Region&) const = default;
};

struct ObservedElement {
  std::string element_id;
  std::string text;
  ElementRole role = ElementRole::other;
  Region region;

  bool operator==(const ObservedElement&) const = default;
};

struct Observation {
  std::string page_id;
  std::string url;
  std::string screenshot;  // relative image handle, e.g. images/<hash>.png
  std::vector<ObservedElement> elements;
  std::string simplified_html;

  const ObservedElement* find(std::string_view element_id) const;

  bool operator==(const Observation&) const = default;
};

// Returns the violated invariant, if any.
std::optional<std::string> validate_observation(const Observation& observation);

// Scheme and host lowercased, empty path becomes "/", query parameters
// sorted, fragment dropped.
std::string normalize_url(std::string_view url);

// Page identity token: "<normalized url>#<digest>", where the digest covers
// the element-role multiset of the document as it was when it loaded.
// Same-document interactions (menus, form fields) never change it.
std::string page_identity(std::string_view url, std::span<const ObservedElement> elements_at_load);

// The normalized URL part of a page identity token.
std::string identity_url(std::string_view identity);

// ---------------------------------------------------------------------------
// Tasks and tuples
// ---------------------------------------------------------------------------

enum class TaskCategory { unclassified, fixed, dynamic };

std::string_view to_string(TaskCategory category);

struct SimpleTask {
  std::string title;
  bool is_allowed = true;
  std::vector<Action> action_sequence;
  std::string origin_page;
  TaskCategory category = TaskCategory::unclassified;
  std::optional<int> group_number;
  bool info_seeking = false;

  bool operator==(const SimpleTask&) const = default;
};

std::optional<std::string> validate_simple_task(const SimpleTask& task);

struct TrajectoryStep {
  Observation observation;
  Action action;
  std::string reasoning;

  bool operator==(const TrajectoryStep&) const = default;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
  Observation final_observation;
  std::string final_reasoning;

  std::vector<Action> actions() const;
  std::size_t size() const { return steps.size(); }

  bool operator==(const Trajectory&) const = default;
};

enum class TupleKind { action_oriented, info_seeking };

std::string_view to_string(TupleKind kind);

inline constexpr int kMinActionOrientedActions = 3;
inline constexpr int kMinRetainedScore = 3;

struct TaskTuple {
  std::string description;
  Trajectory trajectory;
  TupleKind kind = TupleKind::action_oriented;
  int completeness_score = 0;
  bool refined = false;
  // Description before refinement; empty for exploration tuples.
  std::string original_description;

  bool operator==(const TaskTuple&) const = default;
};

std::optional<std::string> validate_task_tuple(const TaskTuple& tuple);

struct QueueEntry {
  std::string page_id;
  std::vector<Action> trace;
  std::size_t depth = 0;

  bool operator==(const QueueEntry&) const = default;
};

QueueEntry make_queue_entry(std::string page_id, std::vector<Action> trace);

// ---------------------------------------------------------------------------
// Structured-text records. Parsing validates the type invariants and throws
// Error(parse_error) on violation.
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const Action& a);
void from_json(const nlohmann::json& j, Action& a);
void to_json(nlohmann::json& j, const Region& r);
void from_json(const nlohmann::json& j, Region& r);
void to_json(nlohmann::json& j, const ObservedElement& e);
void from_json(const nlohmann::json& j, ObservedElement& e);
void to_json(nlohmann::json& j, const Observation& o);
void from_json(const nlohmann::json& j, Observation& o);
void to_json(nlohmann::json& j, const SimpleTask& t);
void from_json(const nlohmann::json& j, SimpleTask& t);
void to_json(nlohmann::json& j, const TrajectoryStep& s);
void from_json(const nlohmann::json& j, TrajectoryStep& s);
void to_json(nlohmann::json& j, const Trajectory& t);
void from_json(const nlohmann::json& j, Trajectory& t);
void to_json(nlohmann::json& j, const TaskTuple& t);
void from_json(const nlohmann::json& j, TaskTuple& t);
void to_json(nlohmann::json& j, const QueueEntry& e);
void from_json(const nlohmann::json& j, QueueEntry& e);

// Parses a JSON document into T, mapping any parse or type failure to
// Error(parse_error).
template <typename T>
T parse_record(std::string_view text) {
  try {
    return nlohmann::json::parse(text).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse_error, e.what());
  }
}

}  // namespace webtrail
