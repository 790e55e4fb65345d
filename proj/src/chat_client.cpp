#include "sde/chat_client.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "sde/error.hpp"

namespace sde {

using nlohmann::json;

HttpChatClient::HttpChatClient(std::string endpoint_url, double timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
  const auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos)
    throw SdeError(ErrorCode::ConfigError,
                   "endpoint url must start with http:// or https://: " + endpoint_url);
  const auto path_start = endpoint_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_ = endpoint_url;
    path_ = "/v1/chat/completions";
  } else {
    base_ = endpoint_url.substr(0, path_start);
    path_ = endpoint_url.substr(path_start);
  }
  if (const char* key = std::getenv("SDE_API_KEY")) api_key_ = key;
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  json body;
  body["model"] = request.model;
  json messages = json::array();
  for (const auto& message : request.messages)
    messages.push_back({{"role", message.role}, {"content", message.content}});
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;

  // One client per call: httplib clients are not safe to share across the
  // bounded fan-out threads.
  httplib::Client client(base_);
  client.set_connection_timeout(static_cast<time_t>(timeout_seconds_),
                                static_cast<time_t>(timeout_seconds_ * 1e6) % 1000000);
  client.set_read_timeout(static_cast<time_t>(timeout_seconds_), 0);

  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto result = client.Post(path_, headers, body.dump(), "application/json");
  if (!result)
    throw SdeError(ErrorCode::IoError,
                   "request to " + base_ + path_ + " failed: " +
                       httplib::to_string(result.error()));
  if (result->status != 200)
    throw SdeError(ErrorCode::IoError,
                   "endpoint returned status " + std::to_string(result->status));

  json reply;
  try {
    reply = json::parse(result->body);
  } catch (const json::parse_error& e) {
    throw SdeError(ErrorCode::IoError, std::string("unparseable endpoint reply: ") + e.what());
  }
  if (!reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty() || !reply["choices"][0].contains("message") ||
      !reply["choices"][0]["message"].contains("content"))
    throw SdeError(ErrorCode::IoError, "endpoint reply missing choices[0].message.content");
  return reply["choices"][0]["message"]["content"].get<std::string>();
}

std::unique_ptr<HttpChatClient> make_http_chat_client(
    const std::string& endpoint_url, double timeout_seconds) {
  return std::make_unique<HttpChatClient>(endpoint_url, timeout_seconds);
}

}  // namespace sde
