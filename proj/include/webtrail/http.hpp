#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

#include "webtrail/error.hpp"

namespace webtrail {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal JSON-over-HTTP client. Transport failures (connection refused,
// timeout) are raised as Error(`unreachable`), so each caller surfaces its own
// error class.
class HttpClient {
 public:
  HttpClient(const std::string& base_url, ErrorCode unreachable,
             std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~HttpClient();
  HttpClient(HttpClient&&) noexcept;
  HttpClient& operator=(HttpClient&&) noexcept;

  void set_header(const std::string& name, const std::string& value);

  HttpResponse post_json(const std::string& path, const std::string& body);
  HttpResponse get(const std::string& path);
  HttpResponse del(const std::string& path);

  // Path prefix from the base URL, e.g. "/v1" for "http://host:1/v1".
  const std::string& base_path() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace webtrail
