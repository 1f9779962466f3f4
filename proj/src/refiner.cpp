#include "webtrail/refiner.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <thread>

#include "webtrail/signature.hpp"

namespace webtrail {

std::string_view to_string(HintMode mode) { return mode == HintMode::full_trace ? "full_trace" : "none"; }

std::string build_hint_block(const TaskTuple& tuple, HintMode mode) {
  if (mode == HintMode::none) return {};
  std::string out = kHintHeader;
  int index = 1;
  for (const auto& step : tuple.trajectory.steps) {
    std::string label;
    if (step.action.kind == ActionKind::go_to) {
      label = step.action.inputs.front();
    } else if (step.action.element_id) {
      const auto* e = step.observation.find(*step.action.element_id);
      label = e ? e->text : *step.action.element_id;
    } else {
      label = "page";
    }
    out += "\nstep " + std::to_string(index++) + ": " + std::string(to_string(step.action.kind)) + " on " + label +
           " at " + step.observation.url;
  }
  return out;
}

RefineOutcome refine(Environment& env, Agent& agent, const TaskTuple& tuple, const RefinementConfig& config) {
  if (config.max_steps < 1) throw Error(ErrorCode::invalid_argument, "max_steps must be >= 1");
  RefineOutcome outcome;
  SessionGuard session(env, env.reset());
  Observation current = env.observe(*session);
  std::vector<Action> history;
  agent.begin(tuple, build_hint_block(tuple, config.hints));

  auto discard = [&](std::string reason) {
    outcome.attempted.final_observation = current;
    outcome.discard_reason = std::move(reason);
    return outcome;
  };

  while (true) {
    AgentStep step = agent.next(current, history);
    if (step.status == AgentStatus::failure) return discard("agent reported failure: " + step.reasoning);
    if (step.status == AgentStatus::success) {
      TaskTuple refined = tuple;
      refined.refined = true;
      refined.original_description = tuple.description;
      if (step.description && !step.description->empty()) refined.description = *step.description;
      refined.trajectory = outcome.attempted;
      refined.trajectory.final_observation = current;
      refined.trajectory.final_reasoning = step.reasoning;
      outcome.attempted = refined.trajectory;
      outcome.refined = std::move(refined);
      return outcome;
    }
    if (outcome.attempted.size() >= static_cast<std::size_t>(config.max_steps))
      return discard("exceeded " + std::to_string(config.max_steps) + " steps without completing");
    if (auto verdict = validate_action(step.action); !verdict)
      return discard("agent chose an invalid action: " + verdict.violation);
    Observation next;
    try {
      next = env.execute(*session, step.action);
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::element_not_found:
        case ErrorCode::action_not_applicable:
        case ErrorCode::navigation_timeout:
          return discard("action " + format_action(step.action) + " failed: " + e.what());
        default:
          throw;
      }
    }
    outcome.attempted.steps.push_back({std::move(current), step.action, std::move(step.reasoning)});
    history.push_back(step.action);
    current = std::move(next);
  }
}

std::vector<RefineOutcome> refine_all(Environment& env, const AgentFactory& make_agent,
                                      const std::vector<TaskTuple>& tuples, const RefinementConfig& config) {
  std::vector<RefineOutcome> results(tuples.size());
  std::vector<std::exception_ptr> failures(tuples.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tuples.size(); i = next++) {
      try {
        auto agent = make_agent();
        results[i] = refine(env, *agent, tuples[i], config);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(config.parallelism, 1, static_cast<int>(std::max<std::size_t>(tuples.size(), 1)));
  std::vector<std::jthread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return results;
}

}  // namespace webtrail
