#include "webtrail/oracle.hpp"

#include <spdlog/spdlog.h>

#include "webtrail/signature.hpp"

namespace webtrail {
namespace {

void require_same_page(const Observation& before, const Observation& after, const char* what) {
  if (before.page_id != after.page_id)
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " needs observations of one page, got '" + before.page_id + "' and '" +
                    after.page_id + "'");
}

bool references_known_elements(const SimpleTask& task, const Observation& o) {
  for (const auto& a : task.action_sequence) {
    if (a.element_id && !o.find(*a.element_id)) return false;
  }
  return true;
}

// Normalizes what a backend produced and drops anything malformed.
std::vector<SimpleTask> sanitize(std::vector<SimpleTask> tasks, const Observation& o, const char* what) {
  std::vector<SimpleTask> kept;
  for (auto& task : tasks) {
    task.origin_page = o.page_id;
    task.category = TaskCategory::unclassified;
    task.group_number.reset();
    task.info_seeking = false;
    if (task.action_sequence.empty()) {
      spdlog::debug("{}: dropping '{}': no actions", what, task.title);
      continue;
    }
    if (auto violation = validate_simple_task(task)) {
      spdlog::debug("{}: dropping '{}': {}", what, task.title, *violation);
      continue;
    }
    if (!references_known_elements(task, o)) {
      spdlog::debug("{}: dropping '{}': unknown element", what, task.title);
      continue;
    }
    kept.push_back(std::move(task));
  }
  return kept;
}

}  // namespace

bool is_new_element(const ObservedElement& element, const Observation& before) {
  const std::string label = normalize_label(element.text);
  for (const auto& e : before.elements) {
    if (e.role == element.role && normalize_label(e.text) == label) return false;
  }
  return true;
}

std::vector<SimpleTask> Oracle::discover_simple_tasks(const Observation& o, const std::vector<SimpleTask>& observed) {
  if (o.elements.empty()) return {};
  return sanitize(do_discover(o, observed), o, "discover");
}

std::vector<SimpleTask> Oracle::discover_differential_tasks(const Observation& before, const Observation& after) {
  require_same_page(before, after, "differential discovery");
  std::vector<SimpleTask> kept;
  for (auto& task : sanitize(do_discover_differential(before, after), after, "differential")) {
    bool all_new = true;
    for (const auto& a : task.action_sequence) {
      if (a.element_id) all_new = all_new && is_new_element(*after.find(*a.element_id), before);
    }
    if (all_new) kept.push_back(std::move(task));
  }
  return kept;
}

VisualVerdict Oracle::is_moderate_visual_change(const Observation& before, const Observation& after) {
  require_same_page(before, after, "visual change");
  return do_visual_change(before, after);
}

std::vector<SimpleTask> Oracle::categorize_tasks(const Observation& o, std::vector<SimpleTask> tasks) {
  if (tasks.empty()) return tasks;
  auto labeled = do_categorize(o, tasks);
  if (labeled.size() != tasks.size())
    throw Error(ErrorCode::schema_violation, "categorization returned " + std::to_string(labeled.size()) +
                                                 " tasks for " + std::to_string(tasks.size()));
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (labeled[i].category == TaskCategory::unclassified)
      throw Error(ErrorCode::schema_violation, "task '" + tasks[i].title + "' left unclassified");
    if (labeled[i].category == TaskCategory::dynamic && !labeled[i].group_number)
      throw Error(ErrorCode::schema_violation, "dynamic task '" + tasks[i].title + "' has no group number");
    tasks[i].category = labeled[i].category;
    tasks[i].group_number = tasks[i].category == TaskCategory::dynamic ? labeled[i].group_number : std::nullopt;
  }
  return tasks;
}

std::vector<SimpleTask> Oracle::propose_info_seeking(const Observation& o, const std::vector<Action>& history) {
  auto asks = do_info_seeking(o, history);
  if (asks.size() > static_cast<std::size_t>(kMaxInfoAsks)) asks.resize(kMaxInfoAsks);
  for (auto& ask : asks) {
    ask.info_seeking = true;
    ask.is_allowed = true;
    ask.action_sequence.clear();
    ask.origin_page = o.page_id;
    ask.category = TaskCategory::fixed;
    ask.group_number.reset();
  }
  return asks;
}

SynthesisResult Oracle::synthesize_and_evaluate(const SynthesisInput& input) {
  SynthesisResult result;
  if (input.kind == TupleKind::action_oriented &&
      input.trajectory.size() < static_cast<std::size_t>(kMinActionOrientedActions)) {
    result.status = SynthesisStatus::precondition_rejected;
    result.reason = "action-oriented synthesis needs at least 3 actions, got " + std::to_string(input.trajectory.size());
    return result;
  }
  const SynthesisDraft draft = do_synthesize(input);
  if (draft.score < 1 || draft.score > 5)
    throw Error(ErrorCode::schema_violation, "completeness score " + std::to_string(draft.score) + " outside 1..5");
  if (draft.description.empty()) throw Error(ErrorCode::schema_violation, "empty task description");
  if (draft.score < kMinRetainedScore) {
    result.status = SynthesisStatus::low_score;
    result.reason = "completeness score " + std::to_string(draft.score);
    return result;
  }
  TaskTuple tuple;
  tuple.description = draft.description;
  tuple.trajectory = input.trajectory;
  tuple.kind = input.kind;
  tuple.completeness_score = draft.score;
  result.status = SynthesisStatus::accepted;
  result.tuple = std::move(tuple);
  return result;
}

}  // namespace webtrail
