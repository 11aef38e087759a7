#include <gtest/gtest.h>

#include "memedial/error.hpp"
#include "memedial/meme_library.hpp"
#include "memedial/mock_backends.hpp"
#include "memedial/templates.hpp"
#include "oracles.hpp"

using namespace memedial;

namespace {

MemeLibrary three_record_library() {
  MemeLibrary lib;
  lib.records.push_back({"m1", "m1.png", {"朋友聊天", "正式场合", "开心", "拉近关系"}, {}});
  lib.records.push_back({"m2", "m2.png", {"工作群", "葬礼", "无奈", "缓解尴尬"}, {}});
  lib.records.push_back({"m3", "m3.png", {"考试前", "道歉", "加油", "鼓励对方"}, {}});
  return lib;
}

std::string record_line(const std::string& id) {
  return R"({"id":")" + id +
         R"(","image_path":"x.png","s_plus":"a","s_minus":"b","emotion":"c","motivation":"d"})";
}

}  // namespace

TEST(LibraryIo, ThreeRecordRoundTrip) {
  MockEmbeddingBackend backend;
  const auto lib = embed_library(three_record_library(), backend, 2);
  const auto back = parse_library(serialize_library(lib));
  EXPECT_EQ(back, lib);
}

TEST(LibraryIo, DoubleSaveIsByteStable) {
  testutil::TempDir dir;
  MockEmbeddingBackend backend(64);
  const auto lib = embed_library(three_record_library(), backend, 1);
  save_library(lib, dir / "a.jsonl");
  save_library(load_library(dir / "a.jsonl"), dir / "b.jsonl");
  EXPECT_EQ(testutil::read_file(dir / "a.jsonl"), testutil::read_file(dir / "b.jsonl"));
}

TEST(LibraryIo, UnembeddedRoundTrip) {
  const auto lib = three_record_library();
  EXPECT_EQ(parse_library(serialize_library(lib)), lib);
}

TEST(LibraryIo, DuplicateIdNamesTheId) {
  const std::string content = record_line("m1") + "\n" + record_line("m1") + "\n";
  try {
    parse_library(content);
    FAIL() << "expected a duplicate-id error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("m1"), std::string::npos);
  }
}

TEST(LibraryIo, MalformedLineReportsLineNumber) {
  const std::string content = record_line("m1") + "\n{not json\n";
  try {
    parse_library(content);
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LibraryIo, MissingFieldIsParseError) {
  EXPECT_THROW(parse_library(R"({"id":"m1","image_path":"x.png","s_plus":"a"})"), ParseError);
}

TEST(LibraryIo, EmptyAnnotationFieldRejected) {
  auto lib = three_record_library();
  lib.records[1].annotation.emotion.clear();
  EXPECT_THROW(lib.validate(), ValidationError);
}

TEST(LibraryIo, MissingFileIsIoError) {
  EXPECT_THROW(load_library("/nonexistent/dir/library.jsonl"), IoError);
}

TEST(Annotation, FourFieldsAreSplit) {
  FunctionVisionBackend vision([](const ChatRequest&) {
    return std::string("场景\n@@@\n不适合\n@@@\n情绪\n@@@\n动机");
  });
  const auto a = annotate_meme(to_bytes("img"), vision);
  EXPECT_EQ(a, (MemeAnnotation{"场景", "不适合", "情绪", "动机"}));
}

TEST(Annotation, ThreeFieldsIsFormatError) {
  FunctionVisionBackend vision([](const ChatRequest&) { return std::string("a\n@@@\nb\n@@@\nc"); });
  EXPECT_THROW(annotate_meme(to_bytes("img"), vision), FormatError);
}

TEST(Annotation, SurroundingWhitespaceTrimmed) {
  const auto a = parse_annotation("  a \n@@@\n\tb\n@@@\n c\n@@@\nd  \n");
  EXPECT_EQ(a, (MemeAnnotation{"a", "b", "c", "d"}));
}

TEST(Annotation, RequestCarriesImageAndAnnotationTask) {
  ChatRequest seen;
  FunctionVisionBackend vision([&](const ChatRequest& r) {
    seen = r;
    return std::string("a\n@@@\nb\n@@@\nc\n@@@\nd");
  });
  annotate_meme(to_bytes("\x89PNG\r\n\x1a\nrest"), vision);
  EXPECT_EQ(seen.task, "annotation");
  ASSERT_EQ(seen.messages.size(), 1u);
  bool has_image = false;
  for (const auto& p : seen.messages[0].parts) has_image |= p.is_image();
  EXPECT_TRUE(has_image);
}

TEST(AnnotateLibrary, OrderIdsAndFailures) {
  testutil::TempDir dir;
  testutil::write_file(dir / "b.png", "\x89PNG\r\n\x1a\nbbb");
  testutil::write_file(dir / "a.png", "\x89PNG\r\n\x1a\naaa");
  testutil::write_file(dir / "a.jpg", "\xff\xd8\xff" "bad");
  testutil::write_file(dir / "notes.txt", "ignored");
  FunctionVisionBackend vision([](const ChatRequest& r) {
    const auto& img = r.messages[0].parts.back().image->data;
    if (static_cast<unsigned char>(img[0]) == 0xff) throw BackendError("refused");
    return std::string("a\n@@@\nb\n@@@\nc\n@@@\nd");
  });
  const auto result = annotate_library(dir.path(), vision, 3);
  // a.jpg sorts first and fails; its id "a" is still reserved, so a.png becomes "a-2".
  ASSERT_EQ(result.library.size(), 2u);
  EXPECT_EQ(result.library.records[0].id, "a-2");
  EXPECT_EQ(result.library.records[0].image_path, "a.png");
  EXPECT_EQ(result.library.records[1].id, "b");
  ASSERT_EQ(result.failures.size(), 1u);
  EXPECT_EQ(result.failures[0].file, "a.jpg");
}

TEST(AnnotateLibrary, EmptyDirectoryRejected) {
  testutil::TempDir dir;
  MockVisionBackend vision;
  EXPECT_THROW(annotate_library(dir.path(), vision, 1), ValidationError);
}

TEST(EmbedLibrary, AllEightVectorsPresentAndUnit) {
  MemeLibrary lib;
  lib.records.push_back({"x", "x.png", {"a", "b", "c", "d"}, {}});
  lib.records.push_back({"y", "y.png", {"e", "f", "g", "h"}, {}});
  MockEmbeddingBackend backend;
  const auto out = embed_library(lib, backend, 2);
  ASSERT_TRUE(out.fully_embedded());
  for (const auto& r : out.records) {
    for (auto d : kAllDimensions) {
      EXPECT_EQ((*r.embeddings)[d].size(), 256u);
      EXPECT_NEAR(l2_norm((*r.embeddings)[d]), 1.0, 1e-6);
    }
  }
  EXPECT_EQ(out.embedding_dim, 256u);
}

TEST(EmbedLibrary, ReembeddingOverwrites) {
  MockEmbeddingBackend b64(64), b32(32);
  const auto once = embed_library(three_record_library(), b64, 1);
  const auto twice = embed_library(once, b32, 1);
  EXPECT_EQ(twice.size(), 3u);
  EXPECT_EQ(twice.records[0].embeddings->s_plus.size(), 32u);
  EXPECT_EQ(twice.embedding_dim, 32u);
}

TEST(EmbedLibrary, EmptyLibraryStaysEmpty) {
  MockEmbeddingBackend backend;
  EXPECT_TRUE(embed_library(MemeLibrary{}, backend, 1).empty());
}

TEST(Keywords, FiveRecordHandCount) {
  MemeLibrary lib;
  const char* emotions[] = {"开心快乐", "开心", "无奈，开心", "快乐 happy", "Happy无奈"};
  for (int i = 0; i < 5; ++i) {
    lib.records.push_back(
        {"k" + std::to_string(i), "k.png", {"s", "t", emotions[i], "m"}, {}});
  }
  // Tokens by hand: 开心 心快 快乐 | 开心 | 无奈 开心 | 快乐 happy | happy 无奈
  const auto table = keyword_stats(lib, Dimension::emotion);
  const std::vector<std::pair<std::string, std::size_t>> expected = {
      {"开心", 3}, {"happy", 2}, {"快乐", 2}, {"无奈", 2}, {"心快", 1}};
  EXPECT_EQ(table.entries, expected);
}

TEST(Keywords, StopTokensRemoved) {
  MemeLibrary lib;
  lib.records.push_back({"k", "k.png", {"的 朋友", "x", "y", "z"}, {}});
  const auto table = keyword_stats(lib, Dimension::s_plus, parse_stop_tokens("的\n"));
  ASSERT_EQ(table.entries.size(), 1u);
  EXPECT_EQ(table.entries[0].first, "朋友");
}

TEST(Keywords, EmptyLibraryRejected) {
  EXPECT_THROW(keyword_stats(MemeLibrary{}, Dimension::emotion), ValidationError);
}

TEST(Dimensions, NamesRoundTrip) {
  for (auto d : kAllDimensions) EXPECT_EQ(parse_dimension(to_string(d)), d);
  EXPECT_THROW(parse_dimension("humor"), ValidationError);
}

TEST(SampleLibrary, BundledLibraryIsEmbeddedAndValid) {
  const auto lib = load_library(std::string(MEMEDIAL_DATA_DIR) + "/sample_library.jsonl");
  EXPECT_GE(lib.size(), 20u);
  EXPECT_TRUE(lib.fully_embedded());
  EXPECT_EQ(lib.embedding_dim, kDefaultMockDim);
  // Stored vectors are exactly what the offline backend produces.
  const auto& r = lib.records.front();
  EXPECT_EQ(r.embeddings->s_plus, mock_embed(r.annotation.s_plus, kDefaultMockDim));
}
