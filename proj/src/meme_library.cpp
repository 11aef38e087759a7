#include "memedial/meme_library.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include "memedial/error.hpp"
#include "memedial/json_io.hpp"
#include "memedial/parallel.hpp"
#include "memedial/rng.hpp"

namespace memedial {


using json_io::ordered_json;

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::s_plus:
      return "s_plus";
    case Dimension::s_minus:
      return "s_minus";
    case Dimension::emotion:
      return "emotion";
    case Dimension::motivation:
      return "motivation";
  }
  return "s_plus";
}

Dimension parse_dimension(std::string_view name) {
  for (Dimension d : kAllDimensions) {
    if (to_string(d) == name) return d;
  }
  throw ValidationError("unknown dimension '" + std::string(name) +
                        "' (expected s_plus, s_minus, emotion or motivation)");
}

const Vector& MemeEmbeddings::operator[](Dimension d) const {
  return const_cast<MemeEmbeddings&>(*this)[d];
}

Vector& MemeEmbeddings::operator[](Dimension d) {
  switch (d) {
    case Dimension::s_plus:
      return s_plus;
    case Dimension::s_minus:
      return s_minus;
    case Dimension::emotion:
      return emotion;
    case Dimension::motivation:
      return motivation;
  }
  return s_plus;
}

const std::string& MemeRecord::text(Dimension d) const {
  switch (d) {
    case Dimension::s_plus:
      return annotation.s_plus;
    case Dimension::s_minus:
      return annotation.s_minus;
    case Dimension::emotion:
      return annotation.emotion;
    case Dimension::motivation:
      return annotation.motivation;
  }
  return annotation.s_plus;
}

const MemeRecord* MemeLibrary::find(std::string_view id) const {
  for (const auto& r : records) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

bool MemeLibrary::fully_embedded() const {
  return !records.empty() && std::all_of(records.begin(), records.end(),
                                         [](const auto& r) { return r.embeddings.has_value(); });
}

void MemeLibrary::validate() const {
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (r.id.empty()) throw ValidationError("record with empty id");
    if (!seen.insert(r.id).second) throw ValidationError("duplicate meme id '" + r.id + "'");
    for (Dimension d : kAllDimensions) {
      if (trim(r.text(d)).empty()) {
        throw ValidationError("meme '" + r.id + "' has empty " + std::string(to_string(d)));
      }
    }
    if (!r.embeddings) continue;
    const std::size_t dim = r.embeddings->s_plus.size();
    if (embedding_dim && *embedding_dim != dim) {
      throw ValidationError("meme '" + r.id + "' embedding dim " + std::to_string(dim) +
                            " does not match library dim " + std::to_string(*embedding_dim));
    }
    for (Dimension d : kAllDimensions) {
      const Vector& v = (*r.embeddings)[d];
      if (v.size() != dim || dim == 0) {
        throw ValidationError("meme '" + r.id + "' has inconsistent embedding sizes");
      }
      if (std::abs(l2_norm(v) - 1.0) > 1e-6) {
        throw ValidationError("meme '" + r.id + "' " + std::string(to_string(d)) +
                              " embedding is not unit norm");
      }
    }
  }
}

namespace {

constexpr std::string_view kFormatTag = "memedial-library";

ordered_json record_to_json(const MemeRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["image_path"] = r.image_path;
  j["s_plus"] = r.annotation.s_plus;
  j["s_minus"] = r.annotation.s_minus;
  j["emotion"] = r.annotation.emotion;
  j["motivation"] = r.annotation.motivation;
  if (r.embeddings) {
    ordered_json e;
    for (Dimension d : kAllDimensions) {
      e[std::string(to_string(d))] = json_io::vector_to_json((*r.embeddings)[d]);
    }
    j["embeddings"] = std::move(e);
  }
  return j;
}

MemeRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("record must be a JSON object");
  MemeRecord r;
  r.id = json_io::get_string(j, "id");
  r.image_path = json_io::get_string(j, "image_path");
  r.annotation.s_plus = json_io::get_string(j, "s_plus");
  r.annotation.s_minus = json_io::get_string(j, "s_minus");
  r.annotation.emotion = json_io::get_string(j, "emotion");
  r.annotation.motivation = json_io::get_string(j, "motivation");
  if (const auto it = j.find("embeddings"); it != j.end() && !it->is_null()) {
    MemeEmbeddings e;
    for (Dimension d : kAllDimensions) {
      const auto name = std::string(to_string(d));
      if (!it->contains(name)) throw ParseError("embeddings missing '" + name + "'");
      e[d] = json_io::vector_from_json(it->at(name));
    }
    r.embeddings = std::move(e);
  }
  return r;
}

}  // namespace

MemeLibrary parse_library(std::string_view content) {
  MemeLibrary lib;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  bool saw_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (j.is_object() && j.contains("format")) {
      if (saw_meta || !lib.records.empty() || j["format"] != kFormatTag) {
        throw ParseError("unexpected metadata line", line_no);
      }
      saw_meta = true;
      if (j.contains("embedding_dim") && !j["embedding_dim"].is_null()) {
        lib.embedding_dim = j["embedding_dim"].get<std::size_t>();
      }
      if (j.contains("source_manifest")) lib.source_manifest = j["source_manifest"];
      continue;
    }
    try {
      lib.records.push_back(record_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!lib.embedding_dim) {
    for (const auto& r : lib.records) {
      if (r.embeddings) {
        lib.embedding_dim = r.embeddings->s_plus.size();
        break;
      }
    }
  }
  lib.validate();
  return lib;
}

MemeLibrary load_library(const std::filesystem::path& path) {
  return parse_library(json_io::read_text_file(path));
}

std::string serialize_library(const MemeLibrary& lib) {
  std::string out;
  ordered_json meta;
  meta["format"] = kFormatTag;
  meta["version"] = 1;
  meta["embedding_dim"] = lib.embedding_dim ? ordered_json(*lib.embedding_dim) : ordered_json();
  meta["source_manifest"] = lib.source_manifest;
  out += meta.dump();
  out += '\n';
  for (const auto& r : lib.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

void save_library(const MemeLibrary& lib, const std::filesystem::path& path) {
  json_io::write_text_file(path, serialize_library(lib));
}

std::string library_checksum(const MemeLibrary& lib) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_library(lib))));
  return buf;
}

MemeAnnotation parse_annotation(const std::string& response) {
  const auto sections = split_sections(response);
  if (sections.size() != 4) {
    throw FormatError("annotation response has " + std::to_string(sections.size()) +
                          " fields, expected 4",
                      response);
  }
  for (const auto& s : sections) {
    if (s.empty()) throw FormatError("annotation response has an empty field", response);
  }
  return {sections[0], sections[1], sections[2], sections[3]};
}

MemeAnnotation annotate_meme(const Bytes& image, VisionBackend& vision,
                             const TemplateSet& templates) {
  if (image.empty()) throw ValidationError("image is empty");
  const std::string prompt =
      templates.render("annotation", {{"sentinel", std::string(kSectionSentinel)}});
  return parse_annotation(vision.describe(image, prompt, "annotation"));
}

bool is_supported_image(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".gif" || ext == ".webp";
}

AnnotationResult annotate_library(const std::filesystem::path& dir, VisionBackend& vision,
                                  std::size_t concurrency, const TemplateSet& templates) {
  if (concurrency == 0) throw ValidationError("concurrency must be positive");
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("image directory '" + dir.string() + "' does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_supported_image(entry.path())) files.push_back(entry.path());
  }
  if (files.empty()) {
    throw ValidationError("no supported images (png/jpg/gif/webp) in '" + dir.string() + "'");
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });

  // Ids are assigned before any backend call so they do not depend on which
  // images fail.
  std::vector<std::string> ids;
  std::set<std::string> taken;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    std::string id = stem;
    for (int n = 2; taken.count(id); ++n) id = stem + "-" + std::to_string(n);
    taken.insert(id);
    ids.push_back(id);
  }

  std::vector<std::optional<MemeAnnotation>> annotations(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), concurrency, [&](std::size_t i) {
    try {
      annotations[i] = annotate_meme(read_file_bytes(files[i].string()), vision, templates);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  AnnotationResult result;
  result.library.source_manifest = "annotated from " + dir.filename().string();
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (annotations[i]) {
      result.library.records.push_back(
          {ids[i], files[i].filename().string(), std::move(*annotations[i]), std::nullopt});
    } else {
      result.failures.push_back({files[i].filename().string(), errors[i]});
    }
  }
  return result;
}

MemeLibrary embed_library(const MemeLibrary& lib, EmbeddingBackend& backend,
                          std::size_t concurrency) {
  if (concurrency == 0) throw ValidationError("concurrency must be positive");
  MemeLibrary out = lib;
  if (out.empty()) return out;
  const std::size_t jobs = out.records.size() * kAllDimensions.size();
  std::vector<Vector> vectors(jobs);
  parallel_for(jobs, concurrency, [&](std::size_t job) {
    const MemeRecord& r = out.records[job / 4];
    const Dimension d = kAllDimensions[job % 4];
    try {
      Vector v = backend.embed(r.text(d));
      if (v.size() != backend.dim()) {
        throw DimensionError("backend returned " + std::to_string(v.size()) +
                             " components, expected " + std::to_string(backend.dim()));
      }
      vectors[job] = std::move(v);
    } catch (const std::exception& e) {
      throw BackendError("embedding meme '" + r.id + "' dimension " + std::string(to_string(d)) +
                         " failed: " + e.what());
    }
  });
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    MemeEmbeddings e;
    for (std::size_t k = 0; k < 4; ++k) e[kAllDimensions[k]] = std::move(vectors[i * 4 + k]);
    out.records[i].embeddings = std::move(e);
  }
  out.embedding_dim = backend.dim();
  out.validate();
  return out;
}

KeywordTable keyword_stats(const MemeLibrary& lib, Dimension dimension,
                           const StopTokens& stop_tokens) {
  if (lib.empty()) throw ValidationError("keyword statistics need a non-empty library");
  std::map<std::string, std::size_t> counts;
  for (const auto& r : lib.records) {
    for (auto& token : tokenize_keywords(r.text(dimension))) {
      if (stop_tokens.count(token)) continue;
      ++counts[std::move(token)];
    }
  }
  KeywordTable table{dimension, {counts.begin(), counts.end()}};
  // std::map already orders by token, so a stable sort on count keeps ties sorted.
  std::stable_sort(table.entries.begin(), table.entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return table;
}

}  // namespace memedial
