#include "webtrail/chat_client.hpp"

#include <nlohmann/json.hpp>

#include "webtrail/http.hpp"

namespace webtrail {

using nlohmann::json;

ChatClient::ChatClient(ChatEndpoint endpoint, ErrorCode unreachable)
    : endpoint_(std::move(endpoint)), unreachable_(unreachable) {
  if (endpoint_.url.empty()) throw Error(unreachable_, "no endpoint configured");
}

std::string ChatClient::post(const std::string& body) const {
  HttpClient http(endpoint_.url, unreachable_, endpoint_.timeout);
  if (!endpoint_.api_key.empty()) http.set_header("Authorization", "Bearer " + endpoint_.api_key);
  const std::string path = http.base_path().empty() ? "/" : "";
  HttpResponse response;
  for (int attempt = 0;; ++attempt) {
    response = http.post_json(path, body);
    if (response.status < 500 || attempt >= 1) break;
  }
  if (response.status != 200)
    throw Error(unreachable_, "endpoint " + endpoint_.url + " answered HTTP " + std::to_string(response.status));
  return response.body;
}

std::string ChatClient::complete(const std::vector<ChatMessage>& messages) const {
  json body{{"model", endpoint_.model}, {"messages", json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"text", m.text}, {"images", m.images}});
  const std::string reply = post(body.dump());
  try {
    const json j = json::parse(reply);
    if (j.contains("text")) return j.at("text").get<std::string>();
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(unreachable_, std::string("malformed completion envelope: ") + e.what());
  }
}

}  // namespace webtrail
