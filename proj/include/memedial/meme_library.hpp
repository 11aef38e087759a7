#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "memedial/backends.hpp"
#include "memedial/templates.hpp"
#include "memedial/text.hpp"
#include "memedial/vector.hpp"

namespace memedial {

// The four annotation dimensions of a meme.
enum class Dimension { s_plus, s_minus, emotion, motivation };

inline constexpr std::array<Dimension, 4> kAllDimensions = {
    Dimension::s_plus, Dimension::s_minus, Dimension::emotion, Dimension::motivation};

std::string_view to_string(Dimension d);
Dimension parse_dimension(std::string_view name);

struct MemeEmbeddings {
  Vector s_plus, s_minus, emotion, motivation;

  const Vector& operator[](Dimension d) const;
  Vector& operator[](Dimension d);
  friend bool operator==(const MemeEmbeddings&, const MemeEmbeddings&) = default;
};

struct MemeAnnotation {
  std::string s_plus;      // where the meme fits
  std::string s_minus;     // where it must not be used
  std::string emotion;     // implied emotion and internet meaning
  std::string motivation;  // sender's motivation and intent
  friend bool operator==(const MemeAnnotation&, const MemeAnnotation&) = default;
};

struct MemeRecord {
  std::string id;
  std::string image_path;  // relative to the library's image directory
  MemeAnnotation annotation;
  std::optional<MemeEmbeddings> embeddings;

  const std::string& text(Dimension d) const;
  friend bool operator==(const MemeRecord&, const MemeRecord&) = default;
};

class MemeLibrary {
 public:
  std::vector<MemeRecord> records;
  std::optional<std::size_t> embedding_dim;
  std::string source_manifest;

  std::size_t size() const noexcept { return records.size(); }
  bool empty() const noexcept { return records.empty(); }
  const MemeRecord* find(std::string_view id) const;
  // True when the library is non-empty and every record carries embeddings.
  bool fully_embedded() const;

  // Checks id uniqueness, annotation completeness and embedding shape/norm.
  // Throws ValidationError.
  void validate() const;

  friend bool operator==(const MemeLibrary&, const MemeLibrary&) = default;
};

// Line-delimited JSON. An optional first line {"format": "memedial-library",
// ...} carries library metadata; every other line is one record.
MemeLibrary load_library(const std::filesystem::path& path);
MemeLibrary parse_library(std::string_view content);
void save_library(const MemeLibrary& lib, const std::filesystem::path& path);
std::string serialize_library(const MemeLibrary& lib);
// FNV-1a over the serialized form, 16 hex digits.
std::string library_checksum(const MemeLibrary& lib);

// Asks the vision model for the four annotation fields in one response.
MemeAnnotation annotate_meme(const Bytes& image, VisionBackend& vision,
                             const TemplateSet& templates = TemplateSet::builtin());
MemeAnnotation parse_annotation(const std::string& response);

struct AnnotationFailure {
  std::string file;
  std::string message;
};

struct AnnotationResult {
  MemeLibrary library;
  std::vector<AnnotationFailure> failures;
};

bool is_supported_image(const std::filesystem::path& p);

// Annotates every png/jpg/gif/webp image in `dir`. Records come out in file
// name order with ids taken from the file stem ("-2", "-3" on collision).
AnnotationResult annotate_library(const std::filesystem::path& dir, VisionBackend& vision,
                                  std::size_t concurrency,
                                  const TemplateSet& templates = TemplateSet::builtin());

// Embeds the four annotation texts of every record, replacing any existing
// embeddings.
MemeLibrary embed_library(const MemeLibrary& lib, EmbeddingBackend& backend,
                          std::size_t concurrency);

struct KeywordTable {
  Dimension dimension;
  std::vector<std::pair<std::string, std::size_t>> entries;  // count desc, token asc
};

KeywordTable keyword_stats(const MemeLibrary& lib, Dimension dimension,
                           const StopTokens& stop_tokens = {});

}  // namespace memedial
