#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "memedial/vector.hpp"

namespace memedial::json_io {

using ordered_json = nlohmann::ordered_json;

// Storage-precision vectors are written with 9 significant digits, which is
// enough to recover every float exactly; reading rounds back to float.
ordered_json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

// Required-field accessors that raise ParseError naming the field.
std::string get_string(const nlohmann::json& j, std::string_view key);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace memedial::json_io
