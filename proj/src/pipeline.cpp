#include "memedial/pipeline.hpp"

#include <cstdio>
#include <mutex>
#include <set>

#include "memedial/evaluation.hpp"
#include "memedial/http_backends.hpp"
#include "memedial/json_io.hpp"
#include "memedial/mock_backends.hpp"
#include "memedial/parallel.hpp"
#include "memedial/rng.hpp"

namespace memedial {

using nlohmann::ordered_json;

DialogueSession run_session(const InitContext& ctx, const MemeLibrary& lib,
                            const SessionOptions& options, std::uint64_t seed, ChatBackend& chat,
                            EmbeddingBackend& embedding, const std::string& session_id) {
  if (options.turns < 1) throw ValidationError("a session needs at least one turn");
  options.aligner.validate();
  const bool retrieve = options.aligner.strategy != SelectionStrategy::random;
  if (lib.empty()) throw ValidationError("meme library is empty");
  if (retrieve && !lib.fully_embedded()) {
    throw MissingEmbeddingError("meme library has records without embeddings; run `embed` first");
  }
  const TemplateSet& templates =
      options.dialogue.templates ? *options.dialogue.templates : TemplateSet::builtin();

  DialogueSession session;
  session.session_id = session_id;
  session.context = ctx;
  session.seed = seed;
  session.strategy = std::string(to_string(options.aligner.strategy));

  SessionRng rng(seed);
  ThresholdState threshold{options.aligner.threshold, std::nullopt};
  std::vector<std::string> history;

  for (int t = 1; t <= options.turns; ++t) {
    SessionTurn turn;
    turn.index = t;
    turn.speaker = speaker_for_turn(t);
    try {
      if (retrieve && t >= 2) {
        RetrievalLog log;
        log.summary = embed_summary(summarize(history, turn.speaker, chat, templates), embedding);
        log.candidates = rank_top_k(log.summary, lib, options.aligner.weights,
                                    options.aligner.top_k, options.aligner.implicit_sign);
        log.turns_since_last = turns_since_last_meme(threshold, t);
        log.threshold = threshold_for_gap(threshold.params, log.turns_since_last);
        log.gate = gate(log.candidates.front().total, log.threshold);
        if (log.gate) {
          log.selected = select_meme(log.candidates, options.aligner.strategy, rng).meme_id;
          threshold.last_meme_turn = t;
        }
        turn.meme_id = log.selected;
        turn.retrieval = std::move(log);
      }
      const Utterance u = next_utterance(ctx, history, t, chat, options.dialogue);
      turn.text = u.text;
      turn.truncated = u.truncated;
    } catch (const Error& e) {
      session.failure = "turn " + std::to_string(t) + ": " + e.kind() + ": " + e.what();
      throw SessionAborted("session '" + session_id + "' failed at " + *session.failure,
                           std::move(session));
    }
    history.push_back(turn.text);
    session.turns.push_back(std::move(turn));
  }

  if (!retrieve) session = random_baseline(std::move(session), lib, rng);
  return session;
}

std::string_view to_string(DatasetMode m) { return m == DatasetMode::news ? "news" : "role"; }

DatasetMode parse_mode(std::string_view s) {
  if (s == "news") return DatasetMode::news;
  if (s == "role") return DatasetMode::role;
  throw ValidationError("mode must be news or role, got '" + std::string(s) + "'");
}

void PipelineConfig::validate() const {
  if (turns < 1) throw ValidationError("turns must be >= 1");
  if (sessions < 1) throw ValidationError("sessions must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  if (scenarios_per_pair < 1) throw ValidationError("scenarios_per_pair must be >= 1");
  if (max_reply_chars < 1) throw ValidationError("max_reply_chars must be >= 1");
  if (library_path.empty()) throw ValidationError("no meme library path configured");
  if (mode == DatasetMode::news && news_path.empty()) {
    throw ValidationError("news mode needs a news file");
  }
  if (mode == DatasetMode::role && roles_path.empty()) {
    throw ValidationError("role mode needs a role pair file");
  }
  if (embedding.dim < 1) throw ValidationError("embedding dim must be >= 1");
  aligner.validate();
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
  if (const auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void read_path(const nlohmann::json& j, const char* key, std::filesystem::path& out,
               const std::filesystem::path& base) {
  if (const auto it = j.find(key); it != j.end() && !it->is_null()) {
    std::filesystem::path p = it->get<std::string>();
    out = p.is_relative() && !base.empty() ? base / p : p;
  }
}

PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base) {
  reject_unknown_keys(j,
                      {"mode", "turns", "sessions", "seed", "output_dir", "library", "news",
                       "roles", "scenarios_per_pair", "workers", "max_reply_chars",
                       "templates_dir", "mock", "aligner", "backends"},
                      "pipeline config");
  PipelineConfig c;
  try {
    if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
    read_if(j, "turns", c.turns);
    read_if(j, "sessions", c.sessions);
    read_if(j, "seed", c.seed);
    read_if(j, "scenarios_per_pair", c.scenarios_per_pair);
    read_if(j, "workers", c.workers);
    read_if(j, "max_reply_chars", c.max_reply_chars);
    read_if(j, "mock", c.mock);
    read_path(j, "output_dir", c.output_dir, base);
    read_path(j, "library", c.library_path, base);
    read_path(j, "news", c.news_path, base);
    read_path(j, "roles", c.roles_path, base);
    read_path(j, "templates_dir", c.templates_dir, base);
    if (const auto it = j.find("aligner"); it != j.end()) {
      c.aligner = aligner_config_from_json(*it, c.aligner);
    }
    if (const auto it = j.find("backends"); it != j.end()) {
      reject_unknown_keys(*it, {"chat", "vision", "embedding"}, "backends");
      if (it->contains("chat")) c.chat = backend_config_from_json(it->at("chat"), c.chat);
      if (it->contains("vision")) c.vision = backend_config_from_json(it->at("vision"), c.vision);
      if (it->contains("embedding")) {
        c.embedding = backend_config_from_json(it->at("embedding"), c.embedding);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("pipeline config: ") + e.what());
  }
  return c;
}

}  // namespace

BackendConfig backend_config_from_json(const nlohmann::json& j, BackendConfig c) {
  reject_unknown_keys(j,
                      {"endpoint", "model", "image_model", "temperature", "max_tokens",
                       "timeout_seconds", "max_attempts", "backoff_seconds", "api_key_env", "dim"},
                      "backend config");
  read_if(j, "endpoint", c.endpoint);
  read_if(j, "model", c.model);
  read_if(j, "image_model", c.image_model);
  read_if(j, "temperature", c.temperature);
  read_if(j, "max_tokens", c.max_tokens);
  read_if(j, "timeout_seconds", c.timeout_seconds);
  read_if(j, "max_attempts", c.max_attempts);
  read_if(j, "backoff_seconds", c.backoff_seconds);
  read_if(j, "api_key_env", c.api_key_env);
  read_if(j, "dim", c.dim);
  return c;
}

ordered_json to_json(const BackendConfig& c) {
  ordered_json j;
  j["endpoint"] = c.endpoint;
  j["model"] = c.model;
  j["image_model"] = c.image_model;
  j["temperature"] = c.temperature;
  j["max_tokens"] = c.max_tokens;
  j["timeout_seconds"] = c.timeout_seconds;
  j["max_attempts"] = c.max_attempts;
  j["backoff_seconds"] = c.backoff_seconds;
  j["api_key_env"] = c.api_key_env;
  j["dim"] = c.dim;
  return j;
}

AlignerConfig aligner_config_from_json(const nlohmann::json& j, AlignerConfig c) {
  reject_unknown_keys(j,
                      {"weights", "implicit_sign", "theta0", "delta", "lambda", "top_k",
                       "strategy"},
                      "aligner config");
  if (const auto it = j.find("weights"); it != j.end()) {
    const auto w = it->get<std::vector<double>>();
    if (w.size() != 4) throw ValidationError("aligner weights need exactly 4 values");
    c.weights = {w[0], w[1], w[2], w[3]};
  }
  if (j.contains("implicit_sign")) {
    c.implicit_sign = parse_implicit_sign(j.at("implicit_sign").get<std::string>());
  }
  read_if(j, "theta0", c.threshold.theta0);
  read_if(j, "delta", c.threshold.delta);
  read_if(j, "lambda", c.threshold.lambda);
  read_if(j, "top_k", c.top_k);
  if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  return c;
}

ordered_json to_json(const AlignerConfig& c) {
  ordered_json j;
  j["weights"] = {c.weights.scenario, c.weights.penalty, c.weights.implicit, c.weights.motivation};
  j["implicit_sign"] = std::string(to_string(c.implicit_sign));
  j["theta0"] = c.threshold.theta0;
  j["delta"] = c.threshold.delta;
  j["lambda"] = c.threshold.lambda;
  j["top_k"] = c.top_k;
  j["strategy"] = std::string(to_string(c.strategy));
  return j;
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) { return config_from_json(j, {}); }

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

ordered_json config_snapshot(const PipelineConfig& cfg) {
  ordered_json j;
  j["mode"] = std::string(to_string(cfg.mode));
  j["turns"] = cfg.turns;
  j["sessions"] = cfg.sessions;
  j["seed"] = cfg.seed;
  j["library"] = cfg.library_path.string();
  j["news"] = cfg.news_path.string();
  j["roles"] = cfg.roles_path.string();
  j["scenarios_per_pair"] = cfg.scenarios_per_pair;
  j["max_reply_chars"] = cfg.max_reply_chars;
  j["templates_dir"] = cfg.templates_dir.string();
  j["mock"] = cfg.mock;
  j["aligner"] = to_json(cfg.aligner);
  j["backends"] = {{"chat", to_json(cfg.chat)},
                   {"vision", to_json(cfg.vision)},
                   {"embedding", to_json(cfg.embedding)}};
  return j;
}

Backends make_backends(const PipelineConfig& cfg) {
  Backends b;
  if (cfg.mock) {
    network::set_allowed(false);
    b.chat = std::make_unique<MockChatBackend>();
    b.vision = std::make_unique<MockVisionBackend>();
    b.embedding = std::make_unique<MockEmbeddingBackend>(cfg.embedding.dim);
  } else {
    b.chat = std::make_unique<HttpChatBackend>(cfg.chat);
    b.vision = std::make_unique<HttpChatBackend>(cfg.vision);
    b.embedding = std::make_unique<HttpEmbeddingBackend>(cfg.embedding);
  }
  return b;
}

std::vector<InitContext> prepare_contexts(const PipelineConfig& cfg, ChatBackend& chat,
                                          const TemplateSet& templates) {
  std::vector<InitContext> out;
  if (cfg.mode == DatasetMode::news) {
    for (const auto& n : load_news(cfg.news_path)) out.push_back(build_init_context(n, templates));
    if (out.empty()) throw ValidationError("news file '" + cfg.news_path.string() + "' is empty");
    return out;
  }
  const auto pairs = load_role_pairs(cfg.roles_path);
  if (pairs.empty()) throw ValidationError("role file '" + cfg.roles_path.string() + "' is empty");
  // Only as many scenarios as the batch can use are requested.
  const std::size_t needed = (cfg.sessions + pairs.size() - 1) / pairs.size();
  const std::size_t per_pair = std::min(cfg.scenarios_per_pair, needed);
  std::vector<std::vector<Scenario>> scenarios(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    scenarios[i] = generate_scenarios(pairs[i], per_pair, chat, templates);
  }
  // Pair-major interleaving: consecutive sessions use different pairs.
  for (std::size_t s = 0; s < per_pair; ++s) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.push_back(build_init_context(pairs[i], scenarios[i][s], templates));
    }
  }
  return out;
}

std::string session_id_for(DatasetMode mode, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return std::string(to_string(mode)) + "-" + buf;
}

BatchResult run_batch(const PipelineConfig& cfg, const MemeLibrary& lib,
                      const std::vector<InitContext>& contexts, ChatBackend& chat,
                      EmbeddingBackend& embedding, const TemplateSet& templates) {
  cfg.validate();
  if (contexts.empty()) throw ValidationError("no initialization contexts to run");

  SessionOptions opts;
  opts.turns = cfg.turns;
  opts.aligner = cfg.aligner;
  opts.dialogue.max_reply_chars = cfg.max_reply_chars;
  opts.dialogue.templates = &templates;

  const auto session_dir = cfg.output_dir / "sessions";
  std::filesystem::create_directories(session_dir);

  BatchResult result;
  result.sessions.resize(cfg.sessions);
  std::mutex io;
  parallel_for(cfg.sessions, cfg.workers, [&](std::size_t i) {
    const std::string id = session_id_for(cfg.mode, i);
    const std::uint64_t seed = derive_seed(cfg.seed, i);
    DialogueSession s;
    std::filesystem::path path;
    try {
      s = run_session(contexts[i % contexts.size()], lib, opts, seed, chat, embedding, id);
      path = session_dir / (id + ".json");
    } catch (const SessionAborted& e) {
      s = e.partial();
      path = session_dir / (id + ".json.failed");
      std::lock_guard lock(io);
      std::fprintf(stderr, "warning: %s\n", e.what());
    }
    save_session(s, path);
    result.sessions[i] = std::move(s);
  });

  ordered_json list = ordered_json::array();
  std::size_t turns = 0, memes = 0;
  for (const auto& s : result.sessions) {
    if (s.failure) {
      ++result.failed;
    } else {
      ++result.ok;
    }
    turns += s.turns.size();
    memes += s.meme_count();
    ordered_json e;
    e["session_id"] = s.session_id;
    e["seed"] = s.seed;
    e["status"] = s.failure ? "failed" : "complete";
    e["turns"] = s.turns.size();
    e["memes"] = s.meme_count();
    list.push_back(std::move(e));
  }
  ordered_json manifest;
  manifest["format"] = "memedial-manifest";
  manifest["version"] = 1;
  manifest["template_version"] = kTemplateVersion;
  manifest["config"] = config_snapshot(cfg);
  manifest["library_checksum"] = library_checksum(lib);
  manifest["counts"] = {{"sessions", result.sessions.size()},
                        {"ok", result.ok},
                        {"failed", result.failed},
                        {"turns", turns},
                        {"memes", memes}};
  manifest["sessions"] = std::move(list);
  result.manifest_path = cfg.output_dir / "manifest.json";
  json_io::write_text_file(result.manifest_path, manifest.dump(2) + "\n");
  return result;
}

}  // namespace memedial
