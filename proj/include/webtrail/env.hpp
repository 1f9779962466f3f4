#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "webtrail/core.hpp"

namespace webtrail {

struct SessionHandle {
  std::string session_id;
  std::string page_id;
  std::uint64_t steps = 0;
};

// A browsing environment. Sessions are single-owner; distinct sessions may be
// driven from different threads.
class Environment {
 public:
  virtual ~Environment() = default;

  // Opens a session positioned at the seed page.
  virtual SessionHandle reset() = 0;

  // Returns an existing session to the seed page with empty history.
  virtual void restart(SessionHandle& session) = 0;

  // Throws element_not_found, action_not_applicable, navigation_timeout,
  // session_closed.
  virtual Observation execute(SessionHandle& session, const Action& action) = 0;

  virtual Observation observe(const SessionHandle& session) = 0;

  virtual void close(SessionHandle& session) = 0;

  virtual std::string backend_name() const = 0;

  // Restarts the session and replays `entry.trace`. Throws replay_divergence
  // when a step fails or the session ends up on a different page.
  Observation goto_page(SessionHandle& session, const QueueEntry& entry);

  // Same as goto_page, but returns every observation along the way.
  Trajectory replay(SessionHandle& session, const QueueEntry& entry);
};

// Closes the session on scope exit.
class SessionGuard {
 public:
  SessionGuard(Environment& env, SessionHandle session) : env_(env), session_(std::move(session)) {}
  ~SessionGuard();
  SessionGuard(const SessionGuard&) = delete;
  SessionGuard& operator=(const SessionGuard&) = delete;

  SessionHandle& operator*() { return session_; }
  SessionHandle* operator->() { return &session_; }

 private:
  Environment& env_;
  SessionHandle session_;
};

}  // namespace webtrail
