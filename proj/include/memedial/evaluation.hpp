#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "memedial/backends.hpp"
#include "memedial/meme_library.hpp"
#include "memedial/rng.hpp"
#include "memedial/session.hpp"
#include "memedial/templates.hpp"

namespace memedial {

// --- Cross-modal consistency ---------------------------------------------

struct ConsistencyScore {
  double cosine = 0.0;  // in [-1, 1]
  double scaled = 0.0;  // (cosine + 1) / 2 * 100
};

ConsistencyScore consistency_from_cosine(double cosine);

// Cosine between the meme image embedding and the reply text embedding.
ConsistencyScore consistency_score(const Bytes& meme_image, std::string_view reply_text,
                                   EmbeddingBackend& backend);

// Maps a meme id to its image bytes.
using ImageResolver = std::function<Bytes(const std::string& meme_id)>;
ImageResolver library_image_resolver(const MemeLibrary& lib, std::filesystem::path image_dir);

struct ConsistencyRecord {
  std::string session_id;
  int turn = 0;
  std::string meme_id;
  std::string strategy;
  ConsistencyScore score;
};

struct SkippedMeme {
  std::string session_id;
  int turn = 0;
  std::string meme_id;
  std::string reason;
};

struct ConsistencyReport {
  std::vector<ConsistencyRecord> scored;  // (session_id, turn) order
  std::vector<SkippedMeme> skipped;
  double mean = 0.0;
  std::size_t count = 0;
};

// Scores every meme that has a following reply; memes on the final turn are
// skipped with a reason. Throws ValidationError when nothing is scoreable.
ConsistencyReport evaluate_consistency(std::span<const DialogueSession> sessions,
                                       const ImageResolver& images, EmbeddingBackend& backend);
ConsistencyReport evaluate_dataset_consistency(const std::filesystem::path& dataset_dir,
                                               const ImageResolver& images,
                                               EmbeddingBackend& backend);

// --- LLM judge ------------------------------------------------------------

struct JudgeScore {
  double semantic = 0.0;
  double emotional = 0.0;
  double contextual = 0.0;
  double humor = 0.0;
  double coherence = 0.0;
  double mean = 0.0;
  bool clamped = false;  // some raw value was outside [0, 100]
};

// Exactly five numbers; out-of-range values are clamped and flagged.
JudgeScore parse_judge_scores(const std::string& response);

struct JudgedMeme {
  int turn = 0;
  std::string meme_id;
  JudgeScore score;
};

// Builds the judge request for the meme at `target_turn`: the transcript as
// one multimodal message, text turns inline and memes as image parts.
ChatRequest build_judge_request(const DialogueSession& session, int target_turn,
                                const ImageResolver& images,
                                const TemplateSet& templates = TemplateSet::builtin());

// One independent judge call per meme in the session.
std::vector<JudgedMeme> judge_dialogue(const DialogueSession& session, const ImageResolver& images,
                                       VisionBackend& judge,
                                       const TemplateSet& templates = TemplateSet::builtin());

// --- Random control -------------------------------------------------------

// For every turn t >= 2, attaches a uniformly drawn meme with probability 1/2.
// Existing memes and retrieval logs are dropped.
DialogueSession random_baseline(DialogueSession session, const MemeLibrary& lib, SessionRng& rng);

// --- Report ---------------------------------------------------------------

struct EvaluationRow {
  std::string dataset;
  std::string session_id;
  int turn = 0;
  std::string meme_id;
  std::string strategy;
  std::optional<ConsistencyScore> consistency;
  std::optional<JudgeScore> judge;
};

// Tab-separated rows with a header line; missing scores are left empty.
std::string report_tsv(std::span<const EvaluationRow> rows);
// Mean judge and consistency score per (dataset, strategy).
std::string summary_table(std::span<const EvaluationRow> rows);

}  // namespace memedial
