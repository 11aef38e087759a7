#pragma once

#include <string>

#include "json.hpp"
#include "memedial/backends.hpp"

namespace memedial {

// Chat-completions client (OpenAI-compatible schema). Serves both the chat
// and the vision capability; image parts are sent as base64 data URLs.
class HttpChatBackend final : public ChatBackend, public VisionBackend {
 public:
  explicit HttpChatBackend(BackendConfig config);
  std::string send(const ChatRequest& request) override;
  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
};

// Embeddings client. Text goes to POST {endpoint}/embeddings with
// {"model", "input": text}; images use the same route with
// {"model": image_model, "input": [{"image": data_url}]}.
class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(BackendConfig config);
  Vector embed(std::string_view text) override;
  Vector embed_image(const Bytes& image) override;
  std::size_t dim() const override { return config_.dim; }

 private:
  Vector request(const nlohmann::json& body);
  BackendConfig config_;
};

// Wire formats, exposed for tests.
namespace wire {
std::string base64_encode(const Bytes& data);
nlohmann::json chat_request_body(const BackendConfig& config, const ChatRequest& request);
std::string parse_chat_response(const std::string& body);
nlohmann::json text_embedding_body(const BackendConfig& config, std::string_view text);
nlohmann::json image_embedding_body(const BackendConfig& config, const Bytes& image);
std::vector<double> parse_embedding_response(const std::string& body);

struct Endpoint {
  std::string base;         // scheme://host[:port]
  std::string path_prefix;  // e.g. "/v1", may be empty
};
Endpoint parse_endpoint(const std::string& url);

// One POST; throws BackendError (retryable for transport errors and 5xx).
std::string post_json(const BackendConfig& config, const std::string& route,
                      const nlohmann::json& body);
}  // namespace wire

}  // namespace memedial
