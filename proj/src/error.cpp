#include "webtrail/error.hpp"

namespace webtrail {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::dangling_target: return "dangling-target";
    case ErrorCode::reveal_cycle: return "reveal-cycle";
    case ErrorCode::environment_unreachable: return "environment-unreachable";
    case ErrorCode::element_not_found: return "element-not-found";
    case ErrorCode::element_not_visible: return "element-not-visible";
    case ErrorCode::action_not_applicable: return "action-not-applicable";
    case ErrorCode::submit_missing_required: return "submit-missing-required";
    case ErrorCode::navigation_timeout: return "navigation-timeout";
    case ErrorCode::replay_divergence: return "replay-divergence";
    case ErrorCode::session_closed: return "session-closed";
    case ErrorCode::oracle_unavailable: return "oracle-unavailable";
    case ErrorCode::schema_violation: return "schema-violation";
    case ErrorCode::agent_endpoint_unavailable: return "agent-endpoint-unavailable";
    case ErrorCode::unrefined_tuple: return "unrefined-tuple";
    case ErrorCode::missing_screenshot: return "missing-screenshot";
    case ErrorCode::write_failure: return "write-failure";
    case ErrorCode::embedder_unavailable: return "embedder-unavailable";
    case ErrorCode::fewer_than_two_titles: return "fewer-than-two-titles";
    case ErrorCode::backend_mismatch: return "backend-mismatch";
    case ErrorCode::run_locked: return "run-locked";
    case ErrorCode::missing_run_data: return "missing-run-data";
  }
  return "unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return 2;
    case ErrorCode::parse_error: return 10;
    case ErrorCode::dangling_target: return 11;
    case ErrorCode::reveal_cycle: return 12;
    case ErrorCode::environment_unreachable: return 20;
    case ErrorCode::element_not_found: return 21;
    case ErrorCode::element_not_visible: return 22;
    case ErrorCode::action_not_applicable: return 23;
    case ErrorCode::submit_missing_required: return 24;
    case ErrorCode::navigation_timeout: return 25;
    case ErrorCode::replay_divergence: return 26;
    case ErrorCode::session_closed: return 27;
    case ErrorCode::oracle_unavailable: return 30;
    case ErrorCode::schema_violation: return 31;
    case ErrorCode::agent_endpoint_unavailable: return 40;
    case ErrorCode::unrefined_tuple: return 50;
    case ErrorCode::missing_screenshot: return 51;
    case ErrorCode::write_failure: return 52;
    case ErrorCode::embedder_unavailable: return 60;
    case ErrorCode::fewer_than_two_titles: return 61;
    case ErrorCode::backend_mismatch: return 62;
    case ErrorCode::run_locked: return 70;
    case ErrorCode::missing_run_data: return 71;
  }
  return 1;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace webtrail
