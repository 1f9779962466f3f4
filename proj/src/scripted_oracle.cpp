#include "webtrail/scripted_oracle.hpp"

#include <algorithm>
#include <map>

#include "webtrail/signature.hpp"

namespace webtrail {
namespace {

std::string page_label(const std::string& page_id) {
  std::string out = page_id;
  std::replace(out.begin(), out.end(), '-', ' ');
  return out;
}

std::string lower_first(std::string text) {
  if (!text.empty()) text[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(text[0])));
  return text;
}

bool is_form_field(ElementRole role) {
  return role == ElementRole::textbox || role == ElementRole::select || role == ElementRole::checkbox;
}

// Fields some submit element on the page already covers.
bool required_elsewhere(const PageDef& page, const ElementDef& e) {
  for (const auto& other : page.elements) {
    if (other.behavior.kind != Behavior::Kind::submit || other.element_id == e.element_id) continue;
    if (std::find(other.behavior.ids.begin(), other.behavior.ids.end(), e.element_id) != other.behavior.ids.end())
      return true;
  }
  return false;
}

std::optional<SimpleTask> task_for(const PageDef& page, const ElementDef& e) {
  SimpleTask task;
  task.is_allowed = !e.excluded_class.has_value();
  switch (e.behavior.kind) {
    case Behavior::Kind::reveal:
      task.title = "Expand " + e.text + " menu";
      task.action_sequence = {Action::click(e.element_id)};
      break;
    case Behavior::Kind::navigate:
      task.title = "Navigate to " + e.text;
      task.action_sequence = leaf_actions(page, e);
      break;
    case Behavior::Kind::toggle:
      task.title = (e.role == ElementRole::checkbox ? "Check " : "Toggle ") + e.text;
      task.action_sequence = leaf_actions(page, e);
      break;
    case Behavior::Kind::submit:
      task.action_sequence = leaf_actions(page, e);
      if (e.role == ElementRole::textbox) {
        const auto& own_fill = task.action_sequence[task.action_sequence.size() - 2];
        task.title = e.text + " for \"" + own_fill.inputs.front() + "\"";
      } else {
        task.title = "Submit the " + page_label(page.page_id) + " form";
      }
      break;
    case Behavior::Kind::noop:
      if (is_form_field(e.role)) {
        if (required_elsewhere(page, e)) return std::nullopt;
        if (e.role == ElementRole::select) {
          task.title = "Select an option in " + e.text;
          task.action_sequence = {Action::select_option(e.element_id, "Option 1")};
        } else if (e.role == ElementRole::checkbox) {
          task.title = "Check " + e.text;
          task.action_sequence = {Action::check(e.element_id)};
        } else {
          return std::nullopt;
        }
      } else if (e.excluded_class) {
        task.title = "Click " + e.text;
        task.action_sequence = {Action::click(e.element_id)};
      } else {
        return std::nullopt;
      }
      break;
  }
  if (is_form_field(e.role) && e.behavior.kind == Behavior::Kind::toggle && required_elsewhere(page, e))
    return std::nullopt;
  return task;
}

bool same_task(const SimpleTask& a, const SimpleTask& b) {
  if (normalize_label(a.title) != normalize_label(b.title)) return false;
  if (a.action_sequence.size() != b.action_sequence.size()) return false;
  for (std::size_t i = 0; i < a.action_sequence.size(); ++i) {
    if (a.action_sequence[i].kind != b.action_sequence[i].kind) return false;
  }
  return true;
}

}  // namespace

ScriptedOracle::ScriptedOracle(std::shared_ptr<const SiteGraph> graph) : sim_(std::move(graph)) {}

const PageDef& ScriptedOracle::page_of(const Observation& o) const {
  const auto* page = sim_.page_for_identity(o.page_id);
  if (!page) throw Error(ErrorCode::invalid_argument, "scripted oracle does not know page '" + o.page_id + "'");
  return *page;
}

std::vector<SimpleTask> ScriptedOracle::tasks_for(const PageDef& page, const Observation& o,
                                                  const std::vector<const ObservedElement*>& elements) const {
  std::vector<SimpleTask> tasks;
  for (const auto* observed : elements) {
    const auto* def = page.find(observed->element_id);
    if (!def) continue;
    if (auto task = task_for(page, *def)) {
      task->origin_page = o.page_id;
      tasks.push_back(std::move(*task));
    }
  }
  return tasks;
}

std::vector<SimpleTask> ScriptedOracle::do_discover(const Observation& o, const std::vector<SimpleTask>& observed) {
  std::vector<const ObservedElement*> all;
  for (const auto& e : o.elements) all.push_back(&e);
  auto tasks = tasks_for(page_of(o), o, all);
  for (auto& task : tasks) {
    for (const auto& seen : observed) {
      if (same_task(task, seen)) task.is_allowed = false;
    }
  }
  return tasks;
}

std::vector<SimpleTask> ScriptedOracle::do_discover_differential(const Observation& before, const Observation& after) {
  std::vector<const ObservedElement*> fresh;
  for (const auto& e : after.elements) {
    if (!before.find(e.element_id)) fresh.push_back(&e);
  }
  return tasks_for(page_of(after), after, fresh);
}

VisualVerdict ScriptedOracle::do_visual_change(const Observation& before, const Observation& after) {
  auto keys = [](const Observation& o) {
    std::multiset<std::pair<ElementRole, std::string>> out;
    for (const auto& e : o.elements) out.emplace(e.role, normalize_label(e.text));
    return out;
  };
  const auto b = keys(before);
  const auto a = keys(after);
  const bool grew = a.size() > b.size() && std::includes(a.begin(), a.end(), b.begin(), b.end());
  const long delta = static_cast<long>(a.size()) - static_cast<long>(b.size());
  if (grew) return {std::to_string(delta) + " elements became visible", true};
  return {delta == 0 ? "the set of visible elements is unchanged" : "no new elements became visible", false};
}

std::vector<SimpleTask> ScriptedOracle::do_categorize(const Observation& o, const std::vector<SimpleTask>& tasks) {
  const auto& page = page_of(o);
  // Group numbers follow first appearance on the page.
  std::map<std::string, int> numbering;
  for (const auto& e : page.elements) {
    if (e.dynamic_group && !numbering.contains(*e.dynamic_group))
      numbering.emplace(*e.dynamic_group, static_cast<int>(numbering.size()) + 1);
  }
  std::vector<SimpleTask> out = tasks;
  for (auto& task : out) {
    task.category = TaskCategory::fixed;
    task.group_number.reset();
    if (task.action_sequence.empty()) continue;
    const auto& last = task.action_sequence.back();
    const auto* def = last.element_id ? page.find(*last.element_id) : nullptr;
    if (def && def->dynamic_group) {
      task.category = TaskCategory::dynamic;
      task.group_number = numbering.at(*def->dynamic_group);
    }
  }
  return out;
}

std::vector<SimpleTask> ScriptedOracle::do_info_seeking(const Observation& o, const std::vector<Action>&) {
  const auto& page = page_of(o);
  std::vector<SimpleTask> asks;
  for (const auto& observed : o.elements) {
    const auto* def = page.find(observed.element_id);
    if (!def || !def->info_payload) continue;
    SimpleTask ask;
    ask.title = "What does the \"" + def->text + "\" section say?";
    ask.info_seeking = true;
    asks.push_back(std::move(ask));
  }
  return asks;
}

SynthesisDraft ScriptedOracle::do_synthesize(const SynthesisInput& input) {
  bool coherent = true;
  for (const auto& step : input.trajectory.steps) {
    if (step.action.element_id && !step.observation.find(*step.action.element_id)) coherent = false;
  }
  // Observation the last simple task started from.
  const auto& steps = input.trajectory.steps;
  const std::size_t own = input.last.action_sequence.size();
  const Observation& start_of_last =
      own > 0 && steps.size() >= own ? steps[steps.size() - own].observation : input.trajectory.final_observation;
  const auto* page = sim_.page_for_identity(start_of_last.page_id);
  const auto* final_page = sim_.page_for_identity(input.trajectory.final_observation.page_id);
  if (!page || !final_page) coherent = false;

  SynthesisDraft draft;
  draft.score = coherent ? kCoherentScore : kIncoherentScore;
  const std::string where = page ? page_label(page->page_id) : std::string("unknown");
  if (input.kind == TupleKind::info_seeking) {
    draft.description = "Go to the " + where + " page and answer: " + input.last.title;
  } else {
    std::string inputs;
    for (const auto& a : input.last.action_sequence) {
      if (a.kind != ActionKind::fill || !a.element_id) continue;
      const auto* e = start_of_last.find(*a.element_id);
      inputs += std::string(inputs.empty() ? " with " : " and ") + normalize_label(e ? e->text : *a.element_id) +
                " \"" + a.inputs.front() + "\"";
    }
    // A form whose page is named after its submit verb ("create forum" with
    // a "Create" button) reads as creating a new object.
    std::string verb;
    if (page && !input.last.action_sequence.empty() && input.last.action_sequence.back().element_id) {
      const ElementDef* last = page->find(*input.last.action_sequence.back().element_id);
      if (last && last->behavior.kind == Behavior::Kind::submit && last->role == ElementRole::button) {
        const std::string label = normalize_label(last->text);
        if (where.rfind(label + " ", 0) == 0) verb = last->text + " a new " + where.substr(label.size() + 1);
      }
    }
    if (!verb.empty()) {
      draft.description = verb + inputs;
    } else {
      draft.description = "Go to the " + where + " page and " + lower_first(input.last.title) + inputs;
      if (final_page) draft.description += ", ending on the " + page_label(final_page->page_id) + " page";
    }
  }
  return draft;
}

}  // namespace webtrail
