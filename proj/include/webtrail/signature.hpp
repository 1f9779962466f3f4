#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "webtrail/core.hpp"

namespace webtrail {

// One action reduced to what survives re-annotation: its kind plus the role
// and label of the element it targets.
struct KeyedStep {
  ActionKind kind = ActionKind::click;
  std::string role;   // empty for element-less actions
  std::string label;  // normalized; the URL for goto

  bool operator==(const KeyedStep&) const = default;
};

// Lowercase, whitespace-collapsed, trimmed.
std::string normalize_label(std::string_view text);

// First word of the normalized title.
std::string title_stem(std::string_view title);

// "kind:role:label|kind:role:label..."; input values are not part of it.
std::string structural_key(std::span<const KeyedStep> steps);

// Resolves each action's element against `observation`. Elements absent from
// it are keyed by their id so the key stays total.
std::vector<KeyedStep> keyed_steps(std::span<const Action> actions, const Observation& observation);

std::string structural_key(std::span<const Action> actions, const Observation& observation);

// Registry key used for cross-page dedup: "<title stem>#<structural key>".
std::string task_signature(const SimpleTask& task, const Observation& observation);

}  // namespace webtrail
