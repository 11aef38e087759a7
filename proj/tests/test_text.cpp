#include <gtest/gtest.h>

#include "memedial/error.hpp"
#include "memedial/templates.hpp"
#include "memedial/text.hpp"

using namespace memedial;

TEST(Utf8, LengthAndTruncateCountCodePoints) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("你好世界"), 4u);
  EXPECT_EQ(utf8_truncate("你好世界", 2), "你好");
  EXPECT_EQ(utf8_truncate("ab你好", 3), "ab你");
  EXPECT_EQ(utf8_truncate("ab", 10), "ab");
}

TEST(Utf8, DecodeEncodeRoundTrip) {
  const std::string s = "a你😀";
  std::string back;
  for (char32_t cp : utf8_decode(s)) back += utf8_encode(cp);
  EXPECT_EQ(back, s);
}

TEST(Trim, AsciiWhitespace) { EXPECT_EQ(trim("  x y \n\t"), "x y"); }

TEST(Tokenize, ShortCjkRunsStayWhole) {
  const auto t = tokenize_keywords("开心，快乐");
  EXPECT_EQ(t, (std::vector<std::string>{"开心", "快乐"}));
}

TEST(Tokenize, LongCjkRunsBecomeBigrams) {
  const auto t = tokenize_keywords("周末计划");
  EXPECT_EQ(t, (std::vector<std::string>{"周末", "末计", "计划"}));
}

TEST(Tokenize, AsciiWordsLowercasedPunctuationSplits) {
  const auto t = tokenize_keywords("Hello, World! 表情包 ok_1");
  EXPECT_EQ(t, (std::vector<std::string>{"hello", "world", "表情", "情包", "ok_1"}));
}

TEST(Tokenize, EmojiAreSeparators) {
  const auto t = tokenize_keywords("笑死😂哈哈");
  EXPECT_EQ(t, (std::vector<std::string>{"笑死", "哈哈"}));
}

TEST(StopTokens, CommentsAndBlankLinesIgnored) {
  const auto s = parse_stop_tokens("# comment\n的\n\n  了 \n");
  EXPECT_EQ(s.size(), 2u);
  EXPECT_TRUE(s.count("的"));
  EXPECT_TRUE(s.count("了"));
}

TEST(Templates, RenderSubstitutesAndRejectsMissing) {
  EXPECT_EQ(render_template("hi {{name}}!", {{"name", "A"}}), "hi A!");
  EXPECT_THROW(render_template("hi {{name}}", {}), ValidationError);
}

TEST(Templates, SplitSectionsTrims) {
  const auto s = split_sections(" one \n@@@\n two\n@@@\nthree ");
  EXPECT_EQ(s, (std::vector<std::string>{"one", "two", "three"}));
}

TEST(Templates, BuiltinSetHasEveryPromptAndStableFingerprints) {
  const auto& t = TemplateSet::builtin();
  for (const char* name : {"constraints", "news_context", "role_context", "phase_init",
                           "phase_early", "phase_middle", "phase_late", "turn_request", "summary",
                           "scenarios", "annotation", "judge"}) {
    EXPECT_FALSE(t.source(name).empty()) << name;
    EXPECT_EQ(t.fingerprint(name).size(), 16u);
  }
  EXPECT_NE(t.fingerprint("phase_early"), t.fingerprint("phase_middle"));
  EXPECT_THROW(t.source("no_such_template"), ValidationError);
}
