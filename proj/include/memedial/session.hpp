#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memedial/aligner.hpp"
#include "memedial/dialogue.hpp"

namespace memedial {

// Audit record of one retrieval step: everything needed to recompute the
// gate decision from the persisted summary vectors and the library.
struct RetrievalLog {
  TurnSummary summary;
  std::vector<ScoredMeme> candidates;  // top-K in ranking order
  std::optional<int> turns_since_last;
  double threshold = 0.0;
  bool gate = false;
  std::optional<std::string> selected;
  friend bool operator==(const RetrievalLog&, const RetrievalLog&) = default;
};

struct SessionTurn {
  int index = 1;
  Speaker speaker = Speaker::A;
  std::string text;
  bool truncated = false;
  std::optional<std::string> meme_id;
  std::optional<RetrievalLog> retrieval;
  friend bool operator==(const SessionTurn&, const SessionTurn&) = default;
};

struct DialogueSession {
  std::string session_id;
  InitContext context;
  std::vector<SessionTurn> turns;
  std::uint64_t seed = 0;
  std::string strategy = "greedy";
  std::optional<std::string> failure;  // set on aborted sessions

  // Consecutive indices from 1, A on odd turns, B on even turns.
  void validate() const;
  std::size_t meme_count() const;
  std::vector<std::string> texts() const;
  friend bool operator==(const DialogueSession&, const DialogueSession&) = default;
};

nlohmann::ordered_json to_json(const DialogueSession& s);
DialogueSession session_from_json(const nlohmann::json& j);

std::string serialize_session(const DialogueSession& s);
void save_session(const DialogueSession& s, const std::filesystem::path& path);
DialogueSession load_session(const std::filesystem::path& path);

// Completed sessions (sessions/*.json) of a dataset directory, sorted by id.
std::vector<DialogueSession> load_dataset_sessions(const std::filesystem::path& dataset_dir);

}  // namespace memedial
