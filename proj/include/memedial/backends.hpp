#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "memedial/error.hpp"
#include "memedial/vector.hpp"

namespace memedial {

using Bytes = std::vector<std::byte>;

Bytes to_bytes(std::string_view text);
Bytes read_file_bytes(const std::string& path);

// Guesses an image MIME type from magic bytes; falls back to image/png.
std::string image_mime_type(const Bytes& image);

// --- Messages -------------------------------------------------------------

enum class Role { system, user, assistant };
std::string_view to_string(Role role);

struct ImagePart {
  Bytes data;
  std::string mime_type = "image/png";
  friend bool operator==(const ImagePart&, const ImagePart&) = default;
};

// A message part is either text or an image.
struct ContentPart {
  std::string text;
  std::shared_ptr<const ImagePart> image;  // non-null for image parts

  static ContentPart of_text(std::string text) { return {std::move(text), nullptr}; }
  static ContentPart of_image(Bytes data, std::string mime = "image/png");
  bool is_image() const noexcept { return image != nullptr; }
};

struct Message {
  Role role = Role::user;
  std::vector<ContentPart> parts;

  static Message text(Role role, std::string body);
  // Concatenation of all text parts.
  std::string joined_text() const;
};

// One chat-completion call. `task` and `params` describe the call to
// deterministic mocks; HTTP backends ignore them.
struct ChatRequest {
  std::string task;
  std::map<std::string, std::string> params;
  std::vector<Message> messages;

  // Hash over task, params and every message part.
  std::uint64_t fingerprint() const;
};

// --- Capabilities ---------------------------------------------------------

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string send(const ChatRequest& request) = 0;
};

class VisionBackend {
 public:
  virtual ~VisionBackend() = default;
  virtual std::string describe(const Bytes& image, std::string_view prompt, std::string task);
  virtual std::string send(const ChatRequest& request) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  // Both return unit vectors of length dim() at storage precision.
  virtual Vector embed(std::string_view text) = 0;
  virtual Vector embed_image(const Bytes& image) = 0;
  virtual std::size_t dim() const = 0;
};

// --- Configuration --------------------------------------------------------

struct BackendConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1";
  std::string model;
  std::string image_model;  // embedding backends only
  double temperature = 0.8;
  int max_tokens = 256;
  double timeout_seconds = 60.0;
  int max_attempts = 3;
  double backoff_seconds = 0.5;
  std::string api_key_env = "OPENAI_API_KEY";
  std::size_t dim = 256;  // embedding backends only
};

// --- Retry ----------------------------------------------------------------

// Runs `call` up to `max_attempts` times. Only BackendErrors marked retryable
// (transport failures, 5xx) are retried, sleeping backoff * 2^i before retry
// i + 1. The final error reports how many attempts were made.
template <typename Fn, typename Sleep>
auto with_retries(int max_attempts, double backoff_seconds, Fn&& call, Sleep&& sleep)
    -> decltype(call()) {
  if (max_attempts < 1) max_attempts = 1;
  double delay = backoff_seconds;
  for (int attempt = 1;; ++attempt) {
    try {
      return call();
    } catch (const BackendError& e) {
      if (!e.retryable() || attempt >= max_attempts) {
        throw BackendError(e.what() + std::string(" (after ") + std::to_string(attempt) +
                               (attempt == 1 ? " attempt)" : " attempts)"),
                           attempt, e.retryable());
      }
    }
    sleep(delay);
    delay *= 2.0;
  }
}

template <typename Fn>
auto with_retries(int max_attempts, double backoff_seconds, Fn&& call) -> decltype(call()) {
  return with_retries(max_attempts, backoff_seconds, std::forward<Fn>(call), [](double s) {
    std::this_thread::sleep_for(std::chrono::duration<double>(s));
  });
}

// --- Network guard --------------------------------------------------------

// Process-wide switch consulted by every HTTP backend before it opens a
// connection. Mock mode turns it off; any attempt is then counted and refused.
namespace network {
void set_allowed(bool allowed);
bool allowed();
// Number of HTTP requests started (or refused) since the last reset.
std::size_t attempts();
void reset_attempts();
void note_attempt();  // throws BackendError when network access is disabled
}  // namespace network

}  // namespace memedial
