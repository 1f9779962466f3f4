#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "webtrail/error.hpp"

namespace webtrail {

struct ChatMessage {
  std::string role;                 // "system", "user" or "assistant"
  std::string text;
  std::vector<std::string> images;  // base64-encoded PNG
};

struct ChatEndpoint {
  std::string url;  // full URL of the completion route
  std::string model;
  std::string api_key;
  std::chrono::milliseconds timeout = std::chrono::seconds(120);
};

// Client for the completion contract shared by the oracle, the refinement
// agent and the embedder:
//   POST {model, messages:[{role, text, images}]} -> {"text": ...}
// An OpenAI-style {"choices":[{"message":{"content":...}}]} reply is accepted
// too. Safe for concurrent use.
class ChatClient {
 public:
  ChatClient(ChatEndpoint endpoint, ErrorCode unreachable);

  std::string complete(const std::vector<ChatMessage>& messages) const;

  // POSTs an arbitrary JSON body to the endpoint and returns the reply body.
  std::string post(const std::string& body) const;

  const ChatEndpoint& endpoint() const { return endpoint_; }

 private:
  ChatEndpoint endpoint_;
  ErrorCode unreachable_;
};

}  // namespace webtrail
