#include "webtrail/env.hpp"

#include <spdlog/spdlog.h>

namespace webtrail {

Trajectory Environment::replay(SessionHandle& session, const QueueEntry& entry) {
  restart(session);
  Trajectory path;
  Observation current = observe(session);
  for (std::size_t i = 0; i < entry.trace.size(); ++i) {
    Observation next;
    try {
      next = execute(session, entry.trace[i]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::session_closed) throw;
      throw Error(ErrorCode::replay_divergence,
                  "step " + std::to_string(i + 1) + " (" + format_action(entry.trace[i]) + ") failed: " + e.what());
    }
    path.steps.push_back({std::move(current), entry.trace[i], {}});
    current = std::move(next);
  }
  if (current.page_id != entry.page_id)
    throw Error(ErrorCode::replay_divergence, "replay reached '" + current.page_id + "', expected '" + entry.page_id + "'");
  path.final_observation = std::move(current);
  return path;
}

Observation Environment::goto_page(SessionHandle& session, const QueueEntry& entry) {
  return replay(session, entry).final_observation;
}

SessionGuard::~SessionGuard() {
  try {
    env_.close(session_);
  } catch (const std::exception& e) {
    spdlog::warn("closing session {} failed: {}", session_.session_id, e.what());
  }
}

}  // namespace webtrail
