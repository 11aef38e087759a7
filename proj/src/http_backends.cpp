#include "memedial/http_backends.hpp"

#include <algorithm>
#include <cstdlib>

#include "httplib.h"

namespace memedial {

namespace wire {

std::string base64_encode(const Bytes& data) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < data.size(); i += 3) {
    const unsigned v = std::to_integer<unsigned>(data[i]) << 16 |
                       std::to_integer<unsigned>(data[i + 1]) << 8 |
                       std::to_integer<unsigned>(data[i + 2]);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = data.size() - i; rest) {
    unsigned v = std::to_integer<unsigned>(data[i]) << 16;
    if (rest == 2) v |= std::to_integer<unsigned>(data[i + 1]) << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

namespace {
std::string data_url(const ImagePart& img) {
  return "data:" + img.mime_type + ";base64," + base64_encode(img.data);
}
}  // namespace

nlohmann::json chat_request_body(const BackendConfig& config, const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    nlohmann::json msg;
    msg["role"] = std::string(to_string(m.role));
    const bool has_image =
        std::any_of(m.parts.begin(), m.parts.end(), [](const auto& p) { return p.is_image(); });
    if (!has_image) {
      msg["content"] = m.joined_text();
    } else {
      nlohmann::json parts = nlohmann::json::array();
      for (const auto& p : m.parts) {
        if (p.is_image()) {
          parts.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url(*p.image)}}}});
        } else {
          parts.push_back({{"type", "text"}, {"text", p.text}});
        }
      }
      msg["content"] = std::move(parts);
    }
    messages.push_back(std::move(msg));
  }
  return {{"model", config.model},
          {"messages", std::move(messages)},
          {"temperature", config.temperature},
          {"max_tokens", config.max_tokens}};
}

std::string parse_chat_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed chat-completions response: ") + e.what());
  }
}

nlohmann::json text_embedding_body(const BackendConfig& config, std::string_view text) {
  return {{"model", config.model}, {"input", std::string(text)}};
}

nlohmann::json image_embedding_body(const BackendConfig& config, const Bytes& image) {
  ImagePart img{image, image_mime_type(image)};
  const std::string& model = config.image_model.empty() ? config.model : config.image_model;
  return {{"model", model}, {"input", nlohmann::json::array({{{"image", data_url(img)}}})}};
}

std::vector<double> parse_embedding_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    return j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed embeddings response: ") + e.what());
  }
}

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("endpoint '" + url + "' must start with http:// or https://");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path_start), prefix};
}

std::string post_json(const BackendConfig& config, const std::string& route,
                      const nlohmann::json& body) {
  network::note_attempt();
  const Endpoint ep = parse_endpoint(config.endpoint);
  httplib::Client client(ep.base);
  const auto timeout = std::chrono::duration<double>(config.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));

  httplib::Headers headers;
  if (!config.api_key_env.empty()) {
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  const std::string path = ep.path_prefix + route;
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw BackendError("POST " + config.endpoint + route + " failed: " +
                           httplib::to_string(res.error()),
                       1, true);
  }
  if (res->status >= 500) {
    throw BackendError("POST " + config.endpoint + route + " returned HTTP " +
                           std::to_string(res->status),
                       1, true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("POST " + config.endpoint + route + " returned HTTP " +
                       std::to_string(res->status) + ": " + res->body.substr(0, 512));
  }
  return res->body;
}

}  // namespace wire

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
  wire::parse_endpoint(config_.endpoint);
}

std::string HttpChatBackend::send(const ChatRequest& request) {
  const auto body = wire::chat_request_body(config_, request);
  return with_retries(config_.max_attempts, config_.backoff_seconds, [&] {
    return wire::parse_chat_response(wire::post_json(config_, "/chat/completions", body));
  });
}

HttpEmbeddingBackend::HttpEmbeddingBackend(BackendConfig config) : config_(std::move(config)) {
  wire::parse_endpoint(config_.endpoint);
  if (config_.dim == 0) throw ValidationError("embedding dim must be positive");
}

Vector HttpEmbeddingBackend::request(const nlohmann::json& body) {
  auto values = with_retries(config_.max_attempts, config_.backoff_seconds, [&] {
    return wire::parse_embedding_response(wire::post_json(config_, "/embeddings", body));
  });
  if (values.size() != config_.dim) {
    throw DimensionError("embedding backend returned " + std::to_string(values.size()) +
                         " components, configured dim is " + std::to_string(config_.dim));
  }
  return unit_storage_vector(Vector(std::move(values)));
}

Vector HttpEmbeddingBackend::embed(std::string_view text) {
  return request(wire::text_embedding_body(config_, text));
}

Vector HttpEmbeddingBackend::embed_image(const Bytes& image) {
  return request(wire::image_embedding_body(config_, image));
}

}  // namespace memedial
