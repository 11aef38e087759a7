#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "memedial/backends.hpp"

namespace memedial {

// Deterministic embedding: seeds a counter-based normal stream with the
// FNV-1a hash of `text`, draws `dim` normals and normalizes.
Vector mock_embed(std::string_view text, std::size_t dim);

inline constexpr std::size_t kDefaultMockDim = 256;

class MockEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit MockEmbeddingBackend(std::size_t dim = kDefaultMockDim) : dim_(dim) {}
  Vector embed(std::string_view text) override;
  Vector embed_image(const Bytes& image) override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
};

// Phrase banks shared by the mock agents and the bundled sample library, so
// that offline runs produce exact annotation matches some of the time.
namespace mock_phrases {
std::span<const std::string_view> scenarios();
std::span<const std::string_view> inappropriate();
std::span<const std::string_view> emotions();
std::span<const std::string_view> motivations();

struct Combo {
  std::size_t scenario, emotion, motivation;
};
inline constexpr std::size_t kComboCount = 64;
// Distinct (scenario, emotion, motivation) triple for c in [0, kComboCount).
Combo combo(std::size_t c);
}  // namespace mock_phrases

// Offline chat agent. Replies are a pure function of the request: the task
// name selects the reply shape and the request fingerprint picks phrases.
class MockChatBackend final : public ChatBackend {
 public:
  std::string send(const ChatRequest& request) override;
};

// Offline vision model for annotation and judging.
class MockVisionBackend final : public VisionBackend {
 public:
  std::string send(const ChatRequest& request) override;
};

using ChatFn = std::function<std::string(const ChatRequest&)>;

class FunctionChatBackend final : public ChatBackend {
 public:
  explicit FunctionChatBackend(ChatFn fn) : fn_(std::move(fn)) {}
  std::string send(const ChatRequest& request) override { return fn_(request); }

 private:
  ChatFn fn_;
};

class FunctionVisionBackend final : public VisionBackend {
 public:
  explicit FunctionVisionBackend(ChatFn fn) : fn_(std::move(fn)) {}
  std::string send(const ChatRequest& request) override { return fn_(request); }

 private:
  ChatFn fn_;
};

}  // namespace memedial
