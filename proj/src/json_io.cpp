#include "memedial/json_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>

#include "memedial/error.hpp"

namespace memedial {

namespace json_io {

ordered_json vector_to_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(static_cast<float>(x)));
    // The nearest double to a 9-digit decimal prints back as that decimal.
    arr.push_back(std::strtod(buf, nullptr));
  }
  return arr;
}

Vector vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParseError("vector must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw ParseError("vector must be an array of numbers");
    out.push_back(static_cast<double>(static_cast<float>(x.get<double>())));
  }
  return Vector(std::move(out));
}

std::string get_string(const nlohmann::json& j, std::string_view key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ParseError("missing field '" + std::string(key) + "'");
  if (!it->is_string()) throw ParseError("field '" + std::string(key) + "' must be a string");
  return it->get<std::string>();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory '" + path.parent_path().string() +
                    "': " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace json_io

}  // namespace memedial
