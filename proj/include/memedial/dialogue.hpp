#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "memedial/backends.hpp"
#include "memedial/templates.hpp"
#include "memedial/vector.hpp"

namespace memedial {

// --- Cold-start inputs ----------------------------------------------------

enum class Topic { sports, entertainment, technology, games, education, health };
enum class Intimacy { stranger, acquaintance, close, very_close };
enum class Dominance { equal, a_dominant, b_dominant, mutual_dependence };
enum class AgeRelation { same_age, a_older, b_older, generational };
enum class PrimaryScenario { work, study, life, entertainment, special };

std::string_view to_string(Topic v);
std::string_view to_string(Intimacy v);
std::string_view to_string(Dominance v);
std::string_view to_string(AgeRelation v);
std::string_view to_string(PrimaryScenario v);
// Each throws ValidationError for a name outside the closed set.
Topic parse_topic(std::string_view s);
Intimacy parse_intimacy(std::string_view s);
Dominance parse_dominance(std::string_view s);
AgeRelation parse_age_relation(std::string_view s);
PrimaryScenario parse_primary_scenario(std::string_view s);

struct NewsItem {
  Topic topic = Topic::sports;
  std::string title;
  std::string text;
  void validate() const;
  friend bool operator==(const NewsItem&, const NewsItem&) = default;
};

struct RoleProfile {
  std::string name;
  std::string background;
  std::string personality;
  std::string current_state;
  friend bool operator==(const RoleProfile&, const RoleProfile&) = default;
};

struct RolePair {
  RoleProfile role_a, role_b;
  Intimacy intimacy = Intimacy::acquaintance;
  Dominance dominance = Dominance::equal;
  AgeRelation age_relation = AgeRelation::same_age;
  PrimaryScenario primary_scenario = PrimaryScenario::life;
  void validate() const;
  friend bool operator==(const RolePair&, const RolePair&) = default;
};

struct Scenario {
  std::string relationship_background;
  std::string event_context;
  void validate() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct RoleSetup {
  RolePair pair;
  Scenario scenario;
  friend bool operator==(const RoleSetup&, const RoleSetup&) = default;
};

enum class ContextKind { news, role };
std::string_view to_string(ContextKind k);

// Initialization context of one session. `rendering` is the full context
// used on the first turn; `brief` is the condensed form for later phases.
struct InitContext {
  ContextKind kind = ContextKind::news;
  std::variant<NewsItem, RoleSetup> payload;
  std::string brief;
  std::string rendering;

  // Every free-text field of the payload (titles, names, descriptions).
  std::vector<std::string> payload_fields() const;
  friend bool operator==(const InitContext&, const InitContext&) = default;
};

InitContext build_init_context(const NewsItem& news,
                               const TemplateSet& templates = TemplateSet::builtin());
InitContext build_init_context(const RolePair& pair, const Scenario& scenario,
                               const TemplateSet& templates = TemplateSet::builtin());

// --- Turns and prompts ----------------------------------------------------

enum class Speaker { A, B };
std::string_view to_string(Speaker s);
Speaker parse_speaker(std::string_view s);
// A speaks on odd turns, B on even turns (t >= 1).
Speaker speaker_for_turn(int t);

enum class Phase { initial, early, middle, late };
std::string_view to_string(Phase p);
// {1} initial, [2,7) early, [7,13) middle, [13, inf) late.
Phase phase_for_turn(int t);
std::string_view phase_template_name(Phase p);

struct DialogueOptions {
  std::size_t max_reply_chars = 60;
  const TemplateSet* templates = &TemplateSet::builtin();
};

struct Prompt {
  Phase phase;
  std::string template_name;
  std::vector<Message> messages;
};

// `history` holds the texts of turns 1..t-1; speakers follow from parity.
Prompt build_prompt(const InitContext& ctx, std::span<const std::string> history, int t,
                    const DialogueOptions& options = {});

struct Utterance {
  std::string text;
  bool truncated = false;
};

Utterance next_utterance(const InitContext& ctx, std::span<const std::string> history, int t,
                         ChatBackend& chat, const DialogueOptions& options = {});

// Renders the transcript as "A：...\nB：..." lines.
std::string render_history(std::span<const std::string> history);

// --- Summary agent --------------------------------------------------------

struct TurnSummary {
  std::string scenario;
  std::string emotion;
  std::string motivation;
  std::optional<Vector> scenario_vec, emotion_vec, motivation_vec;

  bool embedded() const { return scenario_vec && emotion_vec && motivation_vec; }
  friend bool operator==(const TurnSummary&, const TurnSummary&) = default;
};

TurnSummary summarize(std::span<const std::string> history, Speaker next_speaker,
                      ChatBackend& chat, const TemplateSet& templates = TemplateSet::builtin());
TurnSummary parse_summary(const std::string& response);
TurnSummary embed_summary(TurnSummary summary, EmbeddingBackend& backend);

std::vector<Scenario> generate_scenarios(const RolePair& pair, std::size_t n, ChatBackend& chat,
                                         const TemplateSet& templates = TemplateSet::builtin());
std::vector<Scenario> parse_scenarios(const std::string& response, std::size_t expected);

// --- File formats ---------------------------------------------------------

nlohmann::ordered_json to_json(const NewsItem& n);
NewsItem news_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const RolePair& p);
RolePair role_pair_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const InitContext& ctx);
InitContext context_from_json(const nlohmann::json& j);

// One JSON object per line; blank lines skipped; ParseError names the line.
std::vector<NewsItem> load_news(const std::filesystem::path& path);
std::vector<RolePair> load_role_pairs(const std::filesystem::path& path);

}  // namespace memedial
