#include "webtrail/signature.hpp"

#include <cctype>

namespace webtrail {

std::string normalize_label(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string title_stem(std::string_view title) {
  std::string normalized = normalize_label(title);
  return normalized.substr(0, normalized.find(' '));
}

std::string structural_key(std::span<const KeyedStep> steps) {
  std::string key;
  for (const auto& step : steps) {
    if (!key.empty()) key.push_back('|');
    key += to_string(step.kind);
    key.push_back(':');
    key += step.role;
    key.push_back(':');
    key += step.label;
  }
  return key;
}

std::vector<KeyedStep> keyed_steps(std::span<const Action> actions, const Observation& observation) {
  std::vector<KeyedStep> steps;
  steps.reserve(actions.size());
  for (const auto& action : actions) {
    KeyedStep step{action.kind, {}, {}};
    if (action.kind == ActionKind::go_to && !action.inputs.empty()) {
      step.label = normalize_url(action.inputs.front());
    } else if (action.element_id) {
      if (const auto* element = observation.find(*action.element_id)) {
        step.role = std::string(to_string(element->role));
        step.label = normalize_label(element->text);
      } else {
        step.role = "?";
        step.label = *action.element_id;
      }
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

std::string structural_key(std::span<const Action> actions, const Observation& observation) {
  return structural_key(keyed_steps(actions, observation));
}

std::string task_signature(const SimpleTask& task, const Observation& observation) {
  return title_stem(task.title) + "#" + structural_key(task.action_sequence, observation);
}

}  // namespace webtrail
