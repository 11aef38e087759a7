#include "memedial/backends.hpp"

#include <fstream>
#include <iterator>

#include "memedial/rng.hpp"

namespace memedial {

Bytes to_bytes(std::string_view text) {
  Bytes out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) out[i] = static_cast<std::byte>(text[i]);
  return out;
}

Bytes read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return to_bytes(raw);
}

std::string image_mime_type(const Bytes& image) {
  auto starts = [&](std::initializer_list<unsigned> sig) {
    if (image.size() < sig.size()) return false;
    std::size_t i = 0;
    for (unsigned b : sig) {
      if (std::to_integer<unsigned>(image[i++]) != b) return false;
    }
    return true;
  };
  if (starts({0xFF, 0xD8, 0xFF})) return "image/jpeg";
  if (starts({'G', 'I', 'F', '8'})) return "image/gif";
  if (image.size() >= 12 && starts({'R', 'I', 'F', 'F'}) &&
      std::to_integer<char>(image[8]) == 'W' && std::to_integer<char>(image[9]) == 'E') {
    return "image/webp";
  }
  return "image/png";
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system:
      return "system";
    case Role::user:
      return "user";
    case Role::assistant:
      return "assistant";
  }
  return "user";
}

ContentPart ContentPart::of_image(Bytes data, std::string mime) {
  auto img = std::make_shared<ImagePart>();
  img->data = std::move(data);
  img->mime_type = std::move(mime);
  return {{}, std::move(img)};
}

Message Message::text(Role role, std::string body) {
  Message m;
  m.role = role;
  m.parts.push_back(ContentPart::of_text(std::move(body)));
  return m;
}

std::string Message::joined_text() const {
  std::string out;
  for (const auto& p : parts) {
    if (!p.is_image()) out += p.text;
  }
  return out;
}

std::uint64_t ChatRequest::fingerprint() const {
  std::uint64_t h = fnv1a64(task);
  auto mix = [&h](std::uint64_t v) { h = splitmix64(h ^ v); };
  for (const auto& [k, v] : params) {
    mix(fnv1a64(k));
    mix(fnv1a64(v));
  }
  for (const auto& m : messages) {
    mix(static_cast<std::uint64_t>(m.role));
    for (const auto& p : m.parts) {
      mix(p.is_image() ? fnv1a64(std::span<const std::byte>(p.image->data)) : fnv1a64(p.text));
    }
  }
  return h;
}

std::string VisionBackend::describe(const Bytes& image, std::string_view prompt,
                                    std::string task) {
  ChatRequest req;
  req.task = std::move(task);
  Message m;
  m.role = Role::user;
  m.parts.push_back(ContentPart::of_text(std::string(prompt)));
  m.parts.push_back(ContentPart::of_image(image, image_mime_type(image)));
  req.messages.push_back(std::move(m));
  return send(req);
}

namespace network {
namespace {
std::atomic<bool> g_allowed{true};
std::atomic<std::size_t> g_attempts{0};
}  // namespace

void set_allowed(bool allowed) { g_allowed.store(allowed); }
bool allowed() { return g_allowed.load(); }
std::size_t attempts() { return g_attempts.load(); }
void reset_attempts() { g_attempts.store(0); }

void note_attempt() {
  g_attempts.fetch_add(1);
  if (!g_allowed.load()) {
    throw BackendError("network access is disabled (mock mode)", 1, false);
  }
}
}  // namespace network

}  // namespace memedial
