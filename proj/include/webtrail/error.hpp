#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace webtrail {

// Every failure the pipeline can surface. Each code maps to a distinct CLI
// exit status (see exit_code()).
enum class ErrorCode {
  invalid_argument,
  parse_error,
  dangling_target,
  reveal_cycle,
  environment_unreachable,
  element_not_found,
  element_not_visible,
  action_not_applicable,
  submit_missing_required,
  navigation_timeout,
  replay_divergence,
  session_closed,
  oracle_unavailable,
  schema_violation,
  agent_endpoint_unavailable,
  unrefined_tuple,
  missing_screenshot,
  write_failure,
  embedder_unavailable,
  fewer_than_two_titles,
  backend_mismatch,
  run_locked,
  missing_run_data,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a given error class. 0 and 1 are reserved for
// success and unexpected failures, 2 for usage errors.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace webtrail
