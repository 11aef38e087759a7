#include "memedial/templates.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "memedial/error.hpp"
#include "memedial/rng.hpp"
#include "memedial/text.hpp"

namespace memedial {

std::string render_template(std::string_view source, const TemplateVars& vars) {
  std::string out;
  out.reserve(source.size());
  std::size_t pos = 0;
  while (pos < source.size()) {
    const std::size_t open = source.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(source.substr(pos));
      break;
    }
    const std::size_t close = source.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw ValidationError("unterminated placeholder in template");
    }
    out.append(source.substr(pos, open - pos));
    const std::string_view key = source.substr(open + 2, close - open - 2);
    const auto it = vars.find(key);
    if (it == vars.end()) {
      throw ValidationError("template placeholder {{" + std::string(key) + "}} has no value");
    }
    out.append(it->second);
    pos = close + 2;
  }
  return out;
}

std::vector<std::string> split_sections(std::string_view text) {
  std::vector<std::string> sections;
  std::string current;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line) == kSectionSentinel) {
      sections.push_back(trim(current));
      current.clear();
    } else {
      current += line;
      current += '\n';
    }
  }
  sections.push_back(trim(current));
  return sections;
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& [name, body] : builtin_template_sources()) s.sources_[name] = body;
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::load_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("template directory '" + dir.string() + "' does not exist");
  }
  TemplateSet s = builtin();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw IoError("cannot read template '" + entry.path().string() + "'");
    s.sources_[entry.path().stem().string()] =
        std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return s;
}

const std::string& TemplateSet::source(std::string_view name) const {
  const auto it = sources_.find(name);
  if (it == sources_.end()) throw ValidationError("unknown template '" + std::string(name) + "'");
  return it->second;
}

std::string TemplateSet::render(std::string_view name, const TemplateVars& vars) const {
  return trim(render_template(source(name), vars));
}

std::string TemplateSet::fingerprint(std::string_view name) const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(source(name))));
  return buf;
}

std::vector<std::string> TemplateSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sources_) out.push_back(name);
  return out;
}

}  // namespace memedial
