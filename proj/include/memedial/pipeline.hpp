#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "memedial/aligner.hpp"
#include "memedial/backends.hpp"
#include "memedial/dialogue.hpp"
#include "memedial/error.hpp"
#include "memedial/meme_library.hpp"
#include "memedial/session.hpp"

namespace memedial {

struct SessionOptions {
  int turns = 18;
  AlignerConfig aligner;
  DialogueOptions dialogue;
};

// Raised when a session cannot finish; carries the turns produced so far.
class SessionAborted : public Error {
 public:
  SessionAborted(const std::string& message, DialogueSession partial)
      : Error("session", message), partial_(std::move(partial)) {}
  const DialogueSession& partial() const noexcept { return partial_; }

 private:
  DialogueSession partial_;
};

// Runs one dialogue of `options.turns` turns. From turn 2 on, the history so
// far is summarized and scored against the library before the turn is
// generated; a meme is attached when the top total clears the adaptive
// threshold. Turn 1 never carries a meme.
DialogueSession run_session(const InitContext& ctx, const MemeLibrary& lib,
                            const SessionOptions& options, std::uint64_t seed, ChatBackend& chat,
                            EmbeddingBackend& embedding, const std::string& session_id = "session");

enum class DatasetMode { news, role };
std::string_view to_string(DatasetMode m);
DatasetMode parse_mode(std::string_view s);

struct PipelineConfig {
  DatasetMode mode = DatasetMode::news;
  int turns = 18;
  std::size_t sessions = 10;
  AlignerConfig aligner;
  std::uint64_t seed = 42;
  std::filesystem::path output_dir = "out";
  std::filesystem::path library_path;
  std::filesystem::path news_path;
  std::filesystem::path roles_path;
  std::size_t scenarios_per_pair = 3;
  std::size_t workers = 4;
  std::size_t max_reply_chars = 60;
  std::filesystem::path templates_dir;  // empty: built-in templates
  BackendConfig chat;
  BackendConfig vision;
  BackendConfig embedding;
  bool mock = false;

  void validate() const;
};

// Unknown keys are rejected so typos do not silently fall back to defaults.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
// Everything that affects the generated data; output_dir is left out so the
// same run in two directories yields identical manifests.
nlohmann::ordered_json config_snapshot(const PipelineConfig& cfg);

BackendConfig backend_config_from_json(const nlohmann::json& j, BackendConfig base = {});
nlohmann::ordered_json to_json(const BackendConfig& c);
AlignerConfig aligner_config_from_json(const nlohmann::json& j, AlignerConfig base = {});
nlohmann::ordered_json to_json(const AlignerConfig& c);

struct Backends {
  std::unique_ptr<ChatBackend> chat;
  std::unique_ptr<VisionBackend> vision;
  std::unique_ptr<EmbeddingBackend> embedding;
};

// Mock backends when cfg.mock is set (network disabled), HTTP otherwise.
Backends make_backends(const PipelineConfig& cfg);

// News items, or role pairs expanded with generated scenarios, in input order.
std::vector<InitContext> prepare_contexts(const PipelineConfig& cfg, ChatBackend& chat,
                                          const TemplateSet& templates);

struct BatchResult {
  std::vector<DialogueSession> sessions;  // in session index order, failed ones included
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::filesystem::path manifest_path;
};

// Generates cfg.sessions dialogues; session i uses contexts[i % size] and
// seed derive_seed(cfg.seed, i). Writes sessions/<id>.json (or
// <id>.json.failed) and finally manifest.json under cfg.output_dir.
BatchResult run_batch(const PipelineConfig& cfg, const MemeLibrary& lib,
                      const std::vector<InitContext>& contexts, ChatBackend& chat,
                      EmbeddingBackend& embedding, const TemplateSet& templates);

std::string session_id_for(DatasetMode mode, std::size_t index);

}  // namespace memedial
