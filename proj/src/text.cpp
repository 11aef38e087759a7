#include "memedial/text.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "memedial/error.hpp"

namespace memedial {

namespace {

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes one code point starting at s[i]; advances i.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int extra = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++i;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  if (i + extra >= s.size()) {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += extra + 1;
  return cp;
}

bool is_separator(char32_t cp) {
  if (cp < 0x80) {
    return !((cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') ||
             cp == '_');
  }
  return (cp >= 0x2000 && cp <= 0x206F)     // general punctuation
         || (cp >= 0x3000 && cp <= 0x303F)  // CJK symbols and punctuation
         || (cp >= 0xFE30 && cp <= 0xFE4F)  // CJK compatibility forms
         || (cp >= 0xFF00 && cp <= 0xFF0F)  // fullwidth punctuation
         || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65) || cp == 0x00A0 || cp == 0x00B7 || cp == 0xFFFD ||
         (cp >= 0x2190 && cp <= 0x2BFF)  // arrows, shapes, misc symbols
         || (cp >= 0x1F000);              // emoji and pictographs
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space_byte(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space_byte(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) out.push_back(next_code_point(s, i));
  return out;
}

std::string utf8_encode(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++n) next_code_point(s, i);
  return n;
}

std::string utf8_truncate(std::string_view s, std::size_t max_code_points) {
  std::size_t i = 0, n = 0;
  while (i < s.size() && n < max_code_points) {
    next_code_point(s, i);
    ++n;
  }
  return std::string(s.substr(0, i));
}

bool is_cjk_ideograph(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0xF900 && cp <= 0xFAFF) || (cp >= 0x20000 && cp <= 0x2A6DF);
}

std::vector<std::string> tokenize_keywords(std::string_view text) {
  std::vector<std::string> tokens;
  std::vector<char32_t> cjk_run;
  std::string word;

  auto flush_cjk = [&] {
    if (cjk_run.size() <= 2) {
      if (!cjk_run.empty()) {
        std::string t;
        for (char32_t cp : cjk_run) t += utf8_encode(cp);
        tokens.push_back(std::move(t));
      }
    } else {
      for (std::size_t i = 0; i + 1 < cjk_run.size(); ++i) {
        tokens.push_back(utf8_encode(cjk_run[i]) + utf8_encode(cjk_run[i + 1]));
      }
    }
    cjk_run.clear();
  };
  auto flush_word = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };

  for (char32_t cp : utf8_decode(text)) {
    if (is_cjk_ideograph(cp)) {
      flush_word();
      cjk_run.push_back(cp);
    } else if (is_separator(cp)) {
      flush_cjk();
      flush_word();
    } else {
      flush_cjk();
      if (cp >= 'A' && cp <= 'Z') cp = cp - 'A' + 'a';
      word += utf8_encode(cp);
    }
  }
  flush_cjk();
  flush_word();
  return tokens;
}

StopTokens parse_stop_tokens(std::string_view content) {
  StopTokens out;
  std::istringstream in{std::string(content)};
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(std::move(t));
  }
  return out;
}

StopTokens load_stop_tokens(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open stop-token file '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_stop_tokens(content);
}

}  // namespace memedial
