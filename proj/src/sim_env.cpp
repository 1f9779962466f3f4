#include "webtrail/sim_env.hpp"

namespace webtrail {

SimEnvironment::SimEnvironment(std::shared_ptr<const SiteGraph> graph, std::shared_ptr<ScreenshotStore> store)
    : sim_(std::move(graph)), store_(std::move(store)) {}

std::unique_ptr<SimEnvironment> SimEnvironment::from_file(const std::filesystem::path& site_file,
                                                          std::shared_ptr<ScreenshotStore> store,
                                                          std::optional<int> dynamic_item_count) {
  auto graph = std::make_shared<const SiteGraph>(load_sitegraph_file(site_file, dynamic_item_count));
  return std::make_unique<SimEnvironment>(std::move(graph), std::move(store));
}

Observation SimEnvironment::publish(Observation observation) {
  if (store_ && !store_->contains(observation.screenshot))
    store_->put(observation.screenshot, render_placeholder_png(observation));
  return observation;
}

SimState SimEnvironment::state_of(const SessionHandle& session) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(session.session_id);
  if (it == sessions_.end()) throw Error(ErrorCode::session_closed, "session '" + session.session_id + "' is closed");
  return it->second;
}

SessionHandle SimEnvironment::reset() {
  SessionHandle session;
  const SimState initial = sim_.initial_state();
  {
    std::lock_guard lock(mutex_);
    session.session_id = "sim-" + std::to_string(next_id_++);
    sessions_[session.session_id] = initial;
  }
  session.page_id = sim_.observe(initial).page_id;
  return session;
}

void SimEnvironment::restart(SessionHandle& session) {
  state_of(session);
  const SimState initial = sim_.initial_state();
  {
    std::lock_guard lock(mutex_);
    sessions_[session.session_id] = initial;
  }
  session.page_id = sim_.observe(initial).page_id;
}

Observation SimEnvironment::execute(SessionHandle& session, const Action& action) {
  const SimState state = state_of(session);
  SimStep next;
  try {
    next = sim_.step(state, action);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::element_not_visible:
        throw Error(ErrorCode::element_not_found, e.what());
      case ErrorCode::submit_missing_required:
        throw Error(ErrorCode::action_not_applicable, e.what());
      default:
        throw;
    }
  }
  {
    std::lock_guard lock(mutex_);
    sessions_[session.session_id] = next.state;
  }
  session.page_id = next.observation.page_id;
  ++session.steps;
  return publish(std::move(next.observation));
}

Observation SimEnvironment::observe(const SessionHandle& session) { return publish(sim_.observe(state_of(session))); }

void SimEnvironment::close(SessionHandle& session) {
  std::lock_guard lock(mutex_);
  sessions_.erase(session.session_id);
}

}  // namespace webtrail
