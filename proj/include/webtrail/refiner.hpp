#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "webtrail/core.hpp"
#include "webtrail/env.hpp"

namespace webtrail {

enum class HintMode { full_trace, none };

std::string_view to_string(HintMode mode);

struct RefinementConfig {
  int max_steps = 30;
  HintMode hints = HintMode::full_trace;
  int parallelism = 2;
};

enum class AgentStatus { continue_, success, failure };

struct AgentStep {
  Observation observation;
  Action action;  // ignored unless status is continue_
  std::string reasoning;
  AgentStatus status = AgentStatus::continue_;
  // Revised task description, reported with success.
  std::optional<std::string> description;
};

// Step-loop web agent. One instance drives one refinement at a time.
class Agent {
 public:
  virtual ~Agent() = default;

  // `hints` is the rendered hint block (empty when hints are off).
  virtual void begin(const TaskTuple& tuple, const std::string& hints) = 0;

  virtual AgentStep next(const Observation& observation, const std::vector<Action>& history) = 0;
};

using AgentFactory = std::function<std::unique_ptr<Agent>()>;

struct RefineOutcome {
  std::optional<TaskTuple> refined;
  std::string discard_reason;
  Trajectory attempted;  // the agent's executed steps, whether kept or not

  bool discarded() const { return !refined.has_value(); }
};

inline constexpr const char* kHintHeader = "Exploration hints (may be sub-optimal):";

// "step i: <kind> on <label> at <url>" per exploration action under
// kHintHeader; empty text when hints are off.
std::string build_hint_block(const TaskTuple& tuple, HintMode mode);

// Re-executes `tuple` with `agent` in a fresh session.
RefineOutcome refine(Environment& env, Agent& agent, const TaskTuple& tuple, const RefinementConfig& config);

// Refines independent tuples on `config.parallelism` workers, one session and
// one agent each. Results follow input order.
std::vector<RefineOutcome> refine_all(Environment& env, const AgentFactory& make_agent,
                                      const std::vector<TaskTuple>& tuples, const RefinementConfig& config);

}  // namespace webtrail
