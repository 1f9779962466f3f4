#pragma once

#include <memory>
#include <string>
#include <vector>

#include "webtrail/chat_client.hpp"
#include "webtrail/refiner.hpp"
#include "webtrail/screenshot.hpp"
#include "webtrail/simulator.hpp"

namespace webtrail {

// Scrolls forever and never reports an outcome.
class NeverFinishingAgent : public Agent {
 public:
  void begin(const TaskTuple&, const std::string&) override {}
  AgentStep next(const Observation& observation, const std::vector<Action>& history) override;
};

// Plans a shortest action path to the tuple's final page by searching the
// simulator state space. When the exploration trace (given as hints) is
// already that short it is followed as is.
class OptimalSimAgent : public Agent {
 public:
  explicit OptimalSimAgent(std::shared_ptr<const SiteGraph> graph, int max_depth = 30);

  void begin(const TaskTuple& tuple, const std::string& hints) override;
  AgentStep next(const Observation& observation, const std::vector<Action>& history) override;

  const std::vector<Action>& plan() const { return plan_; }

 private:
  std::optional<std::vector<Action>> search(const TaskTuple& tuple, const std::string& goal) const;

  Simulator sim_;
  int max_depth_;
  std::vector<Action> plan_;
  bool planned_ = false;
  bool info_seeking_ = false;
};

// Agent backed by a remote model over the completion contract. The model
// answers {reasoning, status, action, description?}.
class RemoteAgent : public Agent {
 public:
  RemoteAgent(ChatEndpoint endpoint, std::shared_ptr<ScreenshotStore> images);

  void begin(const TaskTuple& tuple, const std::string& hints) override;
  AgentStep next(const Observation& observation, const std::vector<Action>& history) override;

  std::string render_prompt(const Observation& observation, const std::vector<Action>& history) const;

 private:
  ChatClient chat_;
  std::shared_ptr<ScreenshotStore> images_;
  std::string task_;
  std::string hints_;
};

}  // namespace webtrail
