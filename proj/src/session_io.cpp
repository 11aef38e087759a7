#include "memedial/session.hpp"

#include <algorithm>

#include "memedial/error.hpp"
#include "memedial/json_io.hpp"

namespace memedial {

using json_io::get_string;
using nlohmann::ordered_json;

void DialogueSession::validate() const {
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const int expected = static_cast<int>(i) + 1;
    if (turns[i].index != expected) {
      throw ValidationError("session '" + session_id + "': turn " + std::to_string(i) +
                            " has index " + std::to_string(turns[i].index));
    }
    if (turns[i].speaker != speaker_for_turn(expected)) {
      throw ValidationError("session '" + session_id + "': speakers must alternate, A first");
    }
  }
}

std::size_t DialogueSession::meme_count() const {
  return static_cast<std::size_t>(
      std::count_if(turns.begin(), turns.end(), [](const auto& t) { return t.meme_id.has_value(); }));
}

std::vector<std::string> DialogueSession::texts() const {
  std::vector<std::string> out;
  out.reserve(turns.size());
  for (const auto& t : turns) out.push_back(t.text);
  return out;
}

namespace {

ordered_json optional_string(const std::optional<std::string>& s) {
  return s ? ordered_json(*s) : ordered_json();
}

std::optional<std::string> read_optional_string(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<std::string>();
}

ordered_json summary_to_json(const TurnSummary& s) {
  ordered_json j;
  j["scenario"] = s.scenario;
  j["emotion"] = s.emotion;
  j["motivation"] = s.motivation;
  auto vec = [](const std::optional<Vector>& v) {
    return v ? json_io::vector_to_json(*v) : ordered_json();
  };
  j["scenario_vec"] = vec(s.scenario_vec);
  j["emotion_vec"] = vec(s.emotion_vec);
  j["motivation_vec"] = vec(s.motivation_vec);
  return j;
}

TurnSummary summary_from_json(const nlohmann::json& j) {
  TurnSummary s;
  s.scenario = get_string(j, "scenario");
  s.emotion = get_string(j, "emotion");
  s.motivation = get_string(j, "motivation");
  auto vec = [&j](const char* key) -> std::optional<Vector> {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return json_io::vector_from_json(*it);
  };
  s.scenario_vec = vec("scenario_vec");
  s.emotion_vec = vec("emotion_vec");
  s.motivation_vec = vec("motivation_vec");
  return s;
}

ordered_json scored_to_json(const ScoredMeme& m) {
  ordered_json j;
  j["meme_id"] = m.meme_id;
  j["alpha"] = m.components.alpha;
  j["delta"] = m.components.delta;
  j["beta"] = m.components.beta;
  j["gamma"] = m.components.gamma;
  j["total"] = m.total;
  return j;
}

ScoredMeme scored_from_json(const nlohmann::json& j) {
  ScoredMeme m;
  m.meme_id = get_string(j, "meme_id");
  m.components.alpha = j.at("alpha").get<double>();
  m.components.delta = j.at("delta").get<double>();
  m.components.beta = j.at("beta").get<double>();
  m.components.gamma = j.at("gamma").get<double>();
  m.total = j.at("total").get<double>();
  return m;
}

ordered_json retrieval_to_json(const RetrievalLog& r) {
  ordered_json j;
  j["summary"] = summary_to_json(r.summary);
  ordered_json cands = ordered_json::array();
  for (const auto& c : r.candidates) cands.push_back(scored_to_json(c));
  j["candidates"] = std::move(cands);
  j["turns_since_last"] = r.turns_since_last ? ordered_json(*r.turns_since_last) : ordered_json();
  j["threshold"] = r.threshold;
  j["gate"] = r.gate;
  j["selected"] = optional_string(r.selected);
  return j;
}

RetrievalLog retrieval_from_json(const nlohmann::json& j) {
  RetrievalLog r;
  r.summary = summary_from_json(j.at("summary"));
  for (const auto& c : j.at("candidates")) r.candidates.push_back(scored_from_json(c));
  if (const auto& k = j.at("turns_since_last"); !k.is_null()) r.turns_since_last = k.get<int>();
  r.threshold = j.at("threshold").get<double>();
  r.gate = j.at("gate").get<bool>();
  r.selected = read_optional_string(j, "selected");
  return r;
}

}  // namespace

ordered_json to_json(const DialogueSession& s) {
  ordered_json j;
  j["format"] = "memedial-session";
  j["version"] = 1;
  j["session_id"] = s.session_id;
  j["seed"] = s.seed;
  j["strategy"] = s.strategy;
  j["status"] = s.failure ? "failed" : "complete";
  if (s.failure) j["error"] = *s.failure;
  j["context"] = to_json(s.context);
  ordered_json turns = ordered_json::array();
  for (const auto& t : s.turns) {
    ordered_json tj;
    tj["turn"] = t.index;
    tj["speaker"] = std::string(to_string(t.speaker));
    tj["text"] = t.text;
    tj["truncated"] = t.truncated;
    tj["meme_id"] = optional_string(t.meme_id);
    tj["retrieval"] = t.retrieval ? retrieval_to_json(*t.retrieval) : ordered_json();
    turns.push_back(std::move(tj));
  }
  j["turns"] = std::move(turns);
  return j;
}

DialogueSession session_from_json(const nlohmann::json& j) {
  try {
    DialogueSession s;
    s.session_id = get_string(j, "session_id");
    s.seed = j.at("seed").get<std::uint64_t>();
    s.strategy = get_string(j, "strategy");
    if (j.value("status", "complete") == "failed") s.failure = j.value("error", "unknown error");
    s.context = context_from_json(j.at("context"));
    for (const auto& tj : j.at("turns")) {
      SessionTurn t;
      t.index = tj.at("turn").get<int>();
      t.speaker = parse_speaker(get_string(tj, "speaker"));
      t.text = get_string(tj, "text");
      t.truncated = tj.value("truncated", false);
      t.meme_id = read_optional_string(tj, "meme_id");
      if (const auto it = tj.find("retrieval"); it != tj.end() && !it->is_null()) {
        t.retrieval = retrieval_from_json(*it);
      }
      s.turns.push_back(std::move(t));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed session: ") + e.what());
  }
}

std::string serialize_session(const DialogueSession& s) { return to_json(s).dump(2) + "\n"; }

void save_session(const DialogueSession& s, const std::filesystem::path& path) {
  json_io::write_text_file(path, serialize_session(s));
}

DialogueSession load_session(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_io::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("session file '" + path.string() + "': " + e.what());
  }
  return session_from_json(j);
}

std::vector<DialogueSession> load_dataset_sessions(const std::filesystem::path& dataset_dir) {
  const auto dir = dataset_dir / "sessions";
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("dataset '" + dataset_dir.string() + "' has no sessions/ directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<DialogueSession> out;
  for (const auto& f : files) out.push_back(load_session(f));
  return out;
}

}  // namespace memedial
