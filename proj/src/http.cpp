#include "webtrail/http.hpp"

#include <httplib.h>

namespace webtrail {

struct HttpClient::Impl {
  std::unique_ptr<httplib::Client> client;
  std::string base_path;
  std::string origin;
  ErrorCode unreachable;
  httplib::Headers headers;

  HttpResponse check(const httplib::Result& result, const std::string& what) {
    if (!result) {
      throw Error(unreachable, what + " " + origin + base_path + ": " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
  }
};

HttpClient::HttpClient(const std::string& base_url, ErrorCode unreachable, std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>()) {
  impl_->unreachable = unreachable;
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorCode::invalid_argument, "endpoint '" + base_url + "' lacks a scheme");
  const auto path_start = base_url.find('/', scheme + 3);
  impl_->origin = base_url.substr(0, path_start);
  impl_->base_path = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!impl_->base_path.empty() && impl_->base_path.back() == '/') impl_->base_path.pop_back();
  try {
    impl_->client = std::make_unique<httplib::Client>(impl_->origin);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::invalid_argument, "endpoint '" + base_url + "': " + e.what());
  }
  if (!impl_->client->is_valid()) throw Error(ErrorCode::invalid_argument, "endpoint '" + base_url + "' is not usable");
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  impl_->client->set_connection_timeout(secs.count(), usecs.count());
  impl_->client->set_read_timeout(secs.count(), usecs.count());
  impl_->client->set_write_timeout(secs.count(), usecs.count());
}

HttpClient::~HttpClient() = default;
HttpClient::HttpClient(HttpClient&&) noexcept = default;
HttpClient& HttpClient::operator=(HttpClient&&) noexcept = default;

void HttpClient::set_header(const std::string& name, const std::string& value) {
  impl_->headers.erase(name);
  impl_->headers.emplace(name, value);
}

HttpResponse HttpClient::post_json(const std::string& path, const std::string& body) {
  return impl_->check(impl_->client->Post(impl_->base_path + path, impl_->headers, body, "application/json"),
                      "POST " + path);
}

HttpResponse HttpClient::get(const std::string& path) {
  return impl_->check(impl_->client->Get(impl_->base_path + path, impl_->headers), "GET " + path);
}

HttpResponse HttpClient::del(const std::string& path) {
  return impl_->check(impl_->client->Delete(impl_->base_path + path, impl_->headers), "DELETE " + path);
}

const std::string& HttpClient::base_path() const { return impl_->base_path; }

}  // namespace webtrail
