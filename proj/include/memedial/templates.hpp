#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace memedial {

inline constexpr std::string_view kTemplateVersion = "v1";

// Line that separates fields in every delimited model response.
inline constexpr std::string_view kSectionSentinel = "@@@";

using TemplateVars = std::map<std::string, std::string, std::less<>>;

// Substitutes every {{name}} placeholder. A placeholder without a value is a
// ValidationError, so a template/caller mismatch never reaches a model.
std::string render_template(std::string_view source, const TemplateVars& vars);

// Splits a response on sentinel lines; each section is trimmed.
std::vector<std::string> split_sections(std::string_view text);

// Named prompt templates. `builtin()` holds the templates compiled from
// templates/v1; `load_directory` overlays *.txt files from a directory.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  static TemplateSet load_directory(const std::filesystem::path& dir);

  const std::string& source(std::string_view name) const;
  std::string render(std::string_view name, const TemplateVars& vars) const;
  // FNV-1a of the template source, as 16 hex digits.
  std::string fingerprint(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string, std::less<>> sources_;
};

const std::map<std::string, std::string>& builtin_template_sources();

}  // namespace memedial
