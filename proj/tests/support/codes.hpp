#pragma once

#include <functional>
#include <optional>

#include "webtrail/error.hpp"

namespace webtrail::testing {

// Error code raised by `fn`, or nullopt when it returns normally.
inline std::optional<ErrorCode> error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace webtrail::testing
