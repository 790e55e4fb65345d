// Chat-completion client capability. Both the actor runner and the judge
// readouts speak the same hosted-model wire protocol: POST a JSON body
// {model, messages, temperature, max_tokens} and read
// choices[0].message.content back. Bearer token comes from SDE_API_KEY.

#pragma once

#include <memory>
#include <string>
#include <vector>

namespace sde {

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  // Returns the assistant message content. Throws SdeError(IoError) on any
  // transport or protocol failure; retry policy belongs to the caller.
  virtual std::string complete(const ChatRequest& request) = 0;
};

class HttpChatClient : public ChatClient {
 public:
  // endpoint_url: scheme://host[:port][/path]. An empty path defaults to
  // /v1/chat/completions.
  HttpChatClient(std::string endpoint_url, double timeout_seconds);

  std::string complete(const ChatRequest& request) override;

 private:
  std::string base_;
  std::string path_;
  double timeout_seconds_;
  std::string api_key_;
};

std::unique_ptr<HttpChatClient> make_http_chat_client(
    const std::string& endpoint_url, double timeout_seconds);

}  // namespace sde
