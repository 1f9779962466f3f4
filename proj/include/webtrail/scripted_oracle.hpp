#pragma once

#include <memory>

#include "webtrail/oracle.hpp"
#include "webtrail/simulator.hpp"

namespace webtrail {

// Deterministic oracle that answers from site-graph ground truth. Observations
// must come from a simulator over the same graph.
class ScriptedOracle : public Oracle {
 public:
  explicit ScriptedOracle(std::shared_ptr<const SiteGraph> graph);

  std::string name() const override { return "scripted"; }

  // Score given to a coherent trajectory and to one whose actions do not
  // match the observations they were taken on.
  static constexpr int kCoherentScore = 4;
  static constexpr int kIncoherentScore = 2;

 protected:
  std::vector<SimpleTask> do_discover(const Observation& o, const std::vector<SimpleTask>& observed) override;
  std::vector<SimpleTask> do_discover_differential(const Observation& before, const Observation& after) override;
  VisualVerdict do_visual_change(const Observation& before, const Observation& after) override;
  std::vector<SimpleTask> do_categorize(const Observation& o, const std::vector<SimpleTask>& tasks) override;
  std::vector<SimpleTask> do_info_seeking(const Observation& o, const std::vector<Action>& history) override;
  SynthesisDraft do_synthesize(const SynthesisInput& input) override;

 private:
  const PageDef& page_of(const Observation& o) const;
  std::vector<SimpleTask> tasks_for(const PageDef& page, const Observation& o,
                                    const std::vector<const ObservedElement*>& elements) const;

  Simulator sim_;
};

}  // namespace webtrail
