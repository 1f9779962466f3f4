#pragma once

#include <optional>
#include <string>
#include <vector>

#include "webtrail/core.hpp"
#include "webtrail/prompts.hpp"

namespace webtrail {

struct VisualVerdict {
  std::string reason;
  bool answer = false;
};

struct SynthesisInput {
  TupleKind kind = TupleKind::action_oriented;
  Trajectory trajectory;  // full path from the seed, ending in the final observation
  SimpleTask last;        // the simple task whose execution ended the path
};

// What a backend returns for synthesis; the caller assembles the tuple.
struct SynthesisDraft {
  std::string description;
  int score = 0;
};

enum class SynthesisStatus { accepted, precondition_rejected, low_score };

struct SynthesisResult {
  SynthesisStatus status = SynthesisStatus::precondition_rejected;
  std::optional<TaskTuple> tuple;
  std::string reason;
};

// Reasoning interface behind every model call of the exploration loop. The
// public entry points enforce preconditions and post-conditions; backends
// implement the protected hooks.
class Oracle {
 public:
  static constexpr int kMaxInfoAsks = 2;

  virtual ~Oracle() = default;

  virtual std::string name() const = 0;

  // Tasks duplicating `observed` or touching excluded functionality come back
  // with is_allowed=false. Tasks violating SimpleTask invariants or naming
  // elements absent from `o` are dropped.
  std::vector<SimpleTask> discover_simple_tasks(const Observation& o, const std::vector<SimpleTask>& observed);

  // Only tasks whose every element is new in `after` survive.
  std::vector<SimpleTask> discover_differential_tasks(const Observation& before, const Observation& after);

  VisualVerdict is_moderate_visual_change(const Observation& before, const Observation& after);

  // Every returned task is fixed or dynamic; dynamic ones carry a group.
  std::vector<SimpleTask> categorize_tasks(const Observation& o, std::vector<SimpleTask> tasks);

  // At most kMaxInfoAsks asks, each with info_seeking=true and no actions.
  std::vector<SimpleTask> propose_info_seeking(const Observation& o, const std::vector<Action>& history);

  SynthesisResult synthesize_and_evaluate(const SynthesisInput& input);

 protected:
  virtual std::vector<SimpleTask> do_discover(const Observation& o, const std::vector<SimpleTask>& observed) = 0;
  virtual std::vector<SimpleTask> do_discover_differential(const Observation& before, const Observation& after) = 0;
  virtual VisualVerdict do_visual_change(const Observation& before, const Observation& after) = 0;
  virtual std::vector<SimpleTask> do_categorize(const Observation& o, const std::vector<SimpleTask>& tasks) = 0;
  virtual std::vector<SimpleTask> do_info_seeking(const Observation& o, const std::vector<Action>& history) = 0;
  virtual SynthesisDraft do_synthesize(const SynthesisInput& input) = 0;
};

// True when `element` has no (role, label) counterpart in `before`.
bool is_new_element(const ObservedElement& element, const Observation& before);

}  // namespace webtrail
