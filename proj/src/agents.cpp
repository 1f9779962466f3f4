#include "webtrail/agents.hpp"

#include <deque>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "webtrail/hash.hpp"
#include "webtrail/remote_oracle.hpp"

namespace webtrail {
namespace {

std::string label_of(const Observation& o, const Action& a) {
  if (a.kind == ActionKind::go_to) return a.inputs.front();
  if (!a.element_id) return "the page";
  const auto* e = o.find(*a.element_id);
  return e ? e->text : *a.element_id;
}

}  // namespace

AgentStep NeverFinishingAgent::next(const Observation& observation, const std::vector<Action>&) {
  return {observation, Action::scroll_down(), "Looking further down the page.", AgentStatus::continue_, std::nullopt};
}

OptimalSimAgent::OptimalSimAgent(std::shared_ptr<const SiteGraph> graph, int max_depth)
    : sim_(std::move(graph)), max_depth_(max_depth) {}

std::optional<std::vector<Action>> OptimalSimAgent::search(const TaskTuple& tuple, const std::string& goal) const {
  // Inputs seen in the exploration trace are reused; other fields get the
  // canonical sample input.
  std::map<std::string, std::string> known_inputs;
  for (const auto& step : tuple.trajectory.steps) {
    if (step.action.element_id && !step.action.inputs.empty() &&
        (step.action.kind == ActionKind::fill || step.action.kind == ActionKind::select_option))
      known_inputs[*step.action.element_id] = step.action.inputs.front();
  }

  struct Node {
    SimState state;
    std::vector<Action> path;
  };
  // Action-oriented tasks are complete only once their final interaction has
  // happened, not merely when its landing page is reached some other way.
  std::optional<Action> final_action;
  if (tuple.kind == TupleKind::action_oriented && !tuple.trajectory.steps.empty())
    final_action = tuple.trajectory.steps.back().action;
  auto reached = [&](const Observation& o, const Action* last) {
    if (o.page_id != goal) return false;
    if (!final_action) return true;
    return last && last->kind == final_action->kind && last->element_id == final_action->element_id;
  };

  const SimState start = sim_.initial_state();
  if (reached(sim_.observe(start), nullptr)) return std::vector<Action>{};
  std::set<SimState> seen{start};
  std::deque<Node> frontier{{start, {}}};
  while (!frontier.empty()) {
    Node node = std::move(frontier.front());
    frontier.pop_front();
    if (static_cast<int>(node.path.size()) >= max_depth_) continue;
    std::vector<Action> candidates;
    for (const auto* e : sim_.visible_elements(node.state)) {
      const auto& id = e->element_id;
      switch (e->role) {
        case ElementRole::textbox: {
          auto it = known_inputs.find(id);
          candidates.push_back(Action::fill(id, it != known_inputs.end() ? it->second : "sample " + e->text));
          candidates.push_back(Action::press(id, "Enter"));
          break;
        }
        case ElementRole::select: {
          auto it = known_inputs.find(id);
          candidates.push_back(Action::select_option(id, it != known_inputs.end() ? it->second : "Option 1"));
          break;
        }
        case ElementRole::checkbox:
          candidates.push_back(Action::check(id));
          candidates.push_back(Action::uncheck(id));
          break;
        default:
          candidates.push_back(Action::click(id));
      }
    }
    for (const auto& action : candidates) {
      SimStep next;
      try {
        next = sim_.step(node.state, action);
      } catch (const Error&) {
        continue;
      }
      std::vector<Action> path = node.path;
      path.push_back(action);
      if (reached(next.observation, &path.back())) return path;
      if (!seen.insert(next.state).second) continue;
      frontier.push_back({std::move(next.state), std::move(path)});
    }
  }
  return std::nullopt;
}

void OptimalSimAgent::begin(const TaskTuple& tuple, const std::string& hints) {
  const std::string& goal = tuple.trajectory.final_observation.page_id;
  info_seeking_ = tuple.kind == TupleKind::info_seeking;
  auto best = search(tuple, goal);
  planned_ = best.has_value();
  plan_ = best.value_or(std::vector<Action>{});
  if (!planned_ || hints.empty()) return;

  // Follow the hinted trace when it is no longer than the optimum.
  const auto hinted = tuple.trajectory.actions();
  if (hinted.size() != plan_.size()) return;
  SimState state = sim_.initial_state();
  try {
    for (const auto& a : hinted) state = sim_.step(state, a).state;
  } catch (const Error&) {
    return;
  }
  if (sim_.observe(state).page_id == goal) plan_ = hinted;
}

AgentStep OptimalSimAgent::next(const Observation& observation, const std::vector<Action>& history) {
  AgentStep step;
  step.observation = observation;
  if (!planned_) {
    step.status = AgentStatus::failure;
    step.reasoning = "No action sequence reaches the target page.";
    return step;
  }
  if (history.size() >= plan_.size()) {
    step.status = AgentStatus::success;
    step.reasoning = info_seeking_ ? "The requested information is shown on this page." : "The task is complete.";
    return step;
  }
  step.action = plan_[history.size()];
  step.reasoning = "Next I " + std::string(to_string(step.action.kind)) + " \"" + label_of(observation, step.action) +
                   "\" to move toward the goal.";
  return step;
}

RemoteAgent::RemoteAgent(ChatEndpoint endpoint, std::shared_ptr<ScreenshotStore> images)
    : chat_(std::move(endpoint), ErrorCode::agent_endpoint_unavailable), images_(std::move(images)) {}

void RemoteAgent::begin(const TaskTuple& tuple, const std::string& hints) {
  task_ = tuple.description;
  hints_ = hints;
}

std::string RemoteAgent::render_prompt(const Observation& observation, const std::vector<Action>& history) const {
  std::string prompt =
      "You are a web agent that completes a task on a website one action at a time.\n\n"
      "Task: " + task_ + "\n";
  if (!hints_.empty()) prompt += "\n" + hints_ + "\n";
  prompt += "\nCurrent page: " + observation.url + "\nSimplified HTML of the current page:\n" +
            observation.simplified_html + "\n\nPrevious actions:\n";
  if (history.empty()) prompt += "(none)\n";
  for (std::size_t i = 0; i < history.size(); ++i)
    prompt += std::to_string(i + 1) + ". " + format_action(history[i]) + "\n";
  prompt +=
      "\nAvailable actions: goto [url], click [id], fill [id] [text], press [id] [key], selectoption [id] [option], "
      "check [id], uncheck [id], scroll_up, scroll_down.\n"
      "Respond with JSON only:\n"
      "{\"reasoning\": <why this step>, \"status\": <\"continue\", \"success\" or \"failure\">, "
      "\"action\": <next action when continuing>, \"description\": <revised task description, with success>}\n";
  return prompt;
}

AgentStep RemoteAgent::next(const Observation& observation, const std::vector<Action>& history) {
  ChatMessage user{"user", render_prompt(observation, history), {}};
  if (images_ && images_->contains(observation.screenshot))
    user.images.push_back(base64_encode(images_->read(observation.screenshot)));
  std::vector<ChatMessage> conversation{user};

  AgentStep step;
  step.observation = observation;
  std::string problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const std::string reply = chat_.complete(conversation);
    try {
      const auto j = nlohmann::json::parse(extract_json_text(reply));
      step.reasoning = j.value("reasoning", std::string());
      const std::string status = j.at("status").get<std::string>();
      if (status == "success") {
        step.status = AgentStatus::success;
        if (j.contains("description") && j.at("description").is_string())
          step.description = j.at("description").get<std::string>();
      } else if (status == "failure") {
        step.status = AgentStatus::failure;
      } else {
        step.status = AgentStatus::continue_;
        step.action = parse_action_text(j.at("action").get<std::string>());
      }
      return step;
    } catch (const std::exception& e) {
      problem = e.what();
    }
    conversation.push_back({"assistant", reply, {}});
    conversation.push_back({"user", RemoteOracle::kSchemaReminder, {}});
  }
  step.status = AgentStatus::failure;
  step.reasoning = "unusable agent reply: " + problem;
  return step;
}

}  // namespace webtrail
