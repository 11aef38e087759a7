#include "memedial/dialogue.hpp"

#include <array>
#include <sstream>
#include <utility>

#include "memedial/error.hpp"
#include "memedial/json_io.hpp"
#include "memedial/text.hpp"

namespace memedial {

namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Topic, 6> kTopics = {{{Topic::sports, "Sports"},
                                          {Topic::entertainment, "Entertainment"},
                                          {Topic::technology, "Technology"},
                                          {Topic::games, "Games"},
                                          {Topic::education, "Education"},
                                          {Topic::health, "Health"}}};
constexpr NameTable<Intimacy, 4> kIntimacy = {{{Intimacy::stranger, "stranger"},
                                               {Intimacy::acquaintance, "acquaintance"},
                                               {Intimacy::close, "close"},
                                               {Intimacy::very_close, "very_close"}}};
constexpr NameTable<Dominance, 4> kDominance = {{{Dominance::equal, "equal"},
                                                 {Dominance::a_dominant, "a_dominant"},
                                                 {Dominance::b_dominant, "b_dominant"},
                                                 {Dominance::mutual_dependence, "mutual_dependence"}}};
constexpr NameTable<AgeRelation, 4> kAge = {{{AgeRelation::same_age, "same_age"},
                                             {AgeRelation::a_older, "a_older"},
                                             {AgeRelation::b_older, "b_older"},
                                             {AgeRelation::generational, "generational"}}};
constexpr NameTable<PrimaryScenario, 5> kPrimary = {{{PrimaryScenario::work, "work"},
                                                     {PrimaryScenario::study, "study"},
                                                     {PrimaryScenario::life, "life"},
                                                     {PrimaryScenario::entertainment, "entertainment"},
                                                     {PrimaryScenario::special, "special"}}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E v) {
  for (const auto& [e, name] : table) {
    if (e == v) return name;
  }
  return table[0].second;
}

template <typename E, std::size_t N>
E value_of(const NameTable<E, N>& table, std::string_view s, std::string_view what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  std::string allowed;
  for (const auto& [e, name] : table) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  throw ValidationError("invalid " + std::string(what) + " '" + std::string(s) +
                        "' (allowed: " + allowed + ")");
}

void require_text(const std::string& value, const std::string& what) {
  if (trim(value).empty()) throw ValidationError(what + " must not be empty");
}

}  // namespace

std::string_view to_string(Topic v) { return name_of(kTopics, v); }
std::string_view to_string(Intimacy v) { return name_of(kIntimacy, v); }
std::string_view to_string(Dominance v) { return name_of(kDominance, v); }
std::string_view to_string(AgeRelation v) { return name_of(kAge, v); }
std::string_view to_string(PrimaryScenario v) { return name_of(kPrimary, v); }
Topic parse_topic(std::string_view s) { return value_of(kTopics, s, "topic"); }
Intimacy parse_intimacy(std::string_view s) { return value_of(kIntimacy, s, "intimacy"); }
Dominance parse_dominance(std::string_view s) { return value_of(kDominance, s, "dominance"); }
AgeRelation parse_age_relation(std::string_view s) { return value_of(kAge, s, "age_relation"); }
PrimaryScenario parse_primary_scenario(std::string_view s) {
  return value_of(kPrimary, s, "primary_scenario");
}

void NewsItem::validate() const {
  require_text(title, "news title");
  require_text(text, "news text");
}

void RolePair::validate() const {
  require_text(role_a.name, "role_a name");
  require_text(role_b.name, "role_b name");
  if (role_a.name == role_b.name) throw ValidationError("role names must be distinct");
}

void Scenario::validate() const {
  require_text(relationship_background, "scenario relationship_background");
  require_text(event_context, "scenario event_context");
}

std::string_view to_string(ContextKind k) { return k == ContextKind::news ? "news" : "role"; }

std::vector<std::string> InitContext::payload_fields() const {
  std::vector<std::string> out;
  if (const auto* n = std::get_if<NewsItem>(&payload)) {
    out = {n->title, n->text};
  } else {
    const auto& r = std::get<RoleSetup>(payload);
    for (const RoleProfile* p : {&r.pair.role_a, &r.pair.role_b}) {
      for (const std::string* f : {&p->name, &p->background, &p->personality, &p->current_state}) {
        if (!f->empty()) out.push_back(*f);
      }
    }
    out.push_back(r.scenario.relationship_background);
    out.push_back(r.scenario.event_context);
  }
  return out;
}

InitContext build_init_context(const NewsItem& news, const TemplateSet& templates) {
  news.validate();
  InitContext ctx;
  ctx.kind = ContextKind::news;
  ctx.payload = news;
  ctx.brief = news.title;
  ctx.rendering = templates.render(
      "news_context",
      {{"topic", std::string(to_string(news.topic))}, {"title", news.title}, {"text", news.text}});
  return ctx;
}

InitContext build_init_context(const RolePair& pair, const Scenario& scenario,
                               const TemplateSet& templates) {
  pair.validate();
  scenario.validate();
  InitContext ctx;
  ctx.kind = ContextKind::role;
  ctx.payload = RoleSetup{pair, scenario};
  ctx.brief = "A：" + pair.role_a.name + "，" + pair.role_a.current_state + "；B：" +
              pair.role_b.name + "，" + pair.role_b.current_state;
  ctx.rendering = templates.render(
      "role_context", {{"a_name", pair.role_a.name},
                       {"a_background", pair.role_a.background},
                       {"a_personality", pair.role_a.personality},
                       {"a_state", pair.role_a.current_state},
                       {"b_name", pair.role_b.name},
                       {"b_background", pair.role_b.background},
                       {"b_personality", pair.role_b.personality},
                       {"b_state", pair.role_b.current_state},
                       {"intimacy", std::string(to_string(pair.intimacy))},
                       {"dominance", std::string(to_string(pair.dominance))},
                       {"age_relation", std::string(to_string(pair.age_relation))},
                       {"primary_scenario", std::string(to_string(pair.primary_scenario))},
                       {"relationship_background", scenario.relationship_background},
                       {"event_context", scenario.event_context}});
  return ctx;
}

std::string_view to_string(Speaker s) { return s == Speaker::A ? "A" : "B"; }

Speaker parse_speaker(std::string_view s) {
  if (s == "A") return Speaker::A;
  if (s == "B") return Speaker::B;
  throw ValidationError("speaker must be A or B, got '" + std::string(s) + "'");
}

Speaker speaker_for_turn(int t) {
  if (t < 1) throw ValidationError("turn index must be >= 1");
  return t % 2 == 1 ? Speaker::A : Speaker::B;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::initial:
      return "initial";
    case Phase::early:
      return "early";
    case Phase::middle:
      return "middle";
    case Phase::late:
      return "late";
  }
  return "initial";
}

Phase phase_for_turn(int t) {
  if (t < 1) throw ValidationError("turn index must be >= 1");
  if (t == 1) return Phase::initial;
  if (t < 7) return Phase::early;
  if (t < 13) return Phase::middle;
  return Phase::late;
}

std::string_view phase_template_name(Phase p) {
  switch (p) {
    case Phase::initial:
      return "phase_init";
    case Phase::early:
      return "phase_early";
    case Phase::middle:
      return "phase_middle";
    case Phase::late:
      return "phase_late";
  }
  return "phase_init";
}

std::string render_history(std::span<const std::string> history) {
  if (history.empty()) return "（对话尚未开始）";
  std::string out;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i) out += '\n';
    out += to_string(speaker_for_turn(static_cast<int>(i) + 1));
    out += "：";
    out += history[i];
  }
  return out;
}

Prompt build_prompt(const InitContext& ctx, std::span<const std::string> history, int t,
                    const DialogueOptions& options) {
  if (t < 1) throw ValidationError("turn index must be >= 1");
  if (history.size() != static_cast<std::size_t>(t - 1)) {
    throw ValidationError("turn " + std::to_string(t) + " needs " + std::to_string(t - 1) +
                          " prior turns, got " + std::to_string(history.size()));
  }
  const TemplateSet& templates = *options.templates;
  const Phase phase = phase_for_turn(t);
  const std::string speaker(to_string(speaker_for_turn(t)));

  TemplateVars vars{
      {"speaker", speaker},
      {"constraints",
       templates.render("constraints", {{"max_chars", std::to_string(options.max_reply_chars)}})}};
  switch (phase) {
    case Phase::initial:
      vars["context"] = ctx.rendering;
      break;
    case Phase::early:
    case Phase::middle:
      vars["brief"] = ctx.brief;
      break;
    case Phase::late:
      break;
  }

  Prompt prompt;
  prompt.phase = phase;
  prompt.template_name = std::string(phase_template_name(phase));
  prompt.messages.push_back(Message::text(Role::system, templates.render(prompt.template_name, vars)));
  prompt.messages.push_back(Message::text(
      Role::user,
      templates.render("turn_request", {{"history", render_history(history)}, {"speaker", speaker}})));
  return prompt;
}

Utterance next_utterance(const InitContext& ctx, std::span<const std::string> history, int t,
                         ChatBackend& chat, const DialogueOptions& options) {
  Prompt prompt = build_prompt(ctx, history, t, options);
  ChatRequest req;
  req.task = "utterance";
  req.params = {{"turn", std::to_string(t)},
                {"speaker", std::string(to_string(speaker_for_turn(t)))},
                {"phase", std::string(to_string(prompt.phase))}};
  req.messages = std::move(prompt.messages);
  Utterance u;
  u.text = trim(chat.send(req));
  if (u.text.empty()) throw BackendError("chat backend returned an empty reply at turn " +
                                         std::to_string(t));
  if (utf8_length(u.text) > options.max_reply_chars) {
    u.text = utf8_truncate(u.text, options.max_reply_chars);
    u.truncated = true;
  }
  return u;
}

TurnSummary parse_summary(const std::string& response) {
  const auto sections = split_sections(response);
  if (sections.size() != 3) {
    throw FormatError("summary response has " + std::to_string(sections.size()) +
                          " sections, expected 3",
                      response);
  }
  for (const auto& s : sections) {
    if (s.empty()) throw FormatError("summary response has an empty section", response);
  }
  TurnSummary summary;
  summary.scenario = sections[0];
  summary.emotion = sections[1];
  summary.motivation = sections[2];
  return summary;
}

TurnSummary summarize(std::span<const std::string> history, Speaker next_speaker,
                      ChatBackend& chat, const TemplateSet& templates) {
  if (history.empty()) throw ValidationError("summaries start at turn 2 (history is empty)");
  ChatRequest req;
  req.task = "summary";
  req.params = {{"speaker", std::string(to_string(next_speaker))}};
  req.messages.push_back(Message::text(
      Role::user, templates.render("summary", {{"history", render_history(history)},
                                               {"speaker", std::string(to_string(next_speaker))},
                                               {"sentinel", std::string(kSectionSentinel)}})));
  return parse_summary(chat.send(req));
}

TurnSummary embed_summary(TurnSummary summary, EmbeddingBackend& backend) {
  summary.scenario_vec = backend.embed(summary.scenario);
  summary.emotion_vec = backend.embed(summary.emotion);
  summary.motivation_vec = backend.embed(summary.motivation);
  return summary;
}

std::vector<Scenario> parse_scenarios(const std::string& response, std::size_t expected) {
  const auto sections = split_sections(response);
  std::vector<Scenario> out;
  for (const auto& s : sections) {
    std::vector<std::string> lines;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) {
      if (auto t = trim(line); !t.empty()) lines.push_back(std::move(t));
    }
    if (lines.empty()) continue;
    if (lines.size() < 2) {
      throw FormatError("scenario block needs a background line and an event line", response);
    }
    Scenario sc{lines[0], lines[1]};
    for (std::size_t i = 2; i < lines.size(); ++i) sc.event_context += lines[i];
    out.push_back(std::move(sc));
  }
  if (out.size() != expected) {
    throw FormatError("expected " + std::to_string(expected) + " scenarios, got " +
                          std::to_string(out.size()),
                      response);
  }
  return out;
}

std::vector<Scenario> generate_scenarios(const RolePair& pair, std::size_t n, ChatBackend& chat,
                                         const TemplateSet& templates) {
  if (n == 0) throw ValidationError("scenario count must be >= 1");
  pair.validate();
  ChatRequest req;
  req.task = "scenarios";
  req.params = {{"n", std::to_string(n)}};
  req.messages.push_back(Message::text(
      Role::user,
      templates.render("scenarios",
                       {{"a_name", pair.role_a.name},
                        {"a_background", pair.role_a.background},
                        {"b_name", pair.role_b.name},
                        {"b_background", pair.role_b.background},
                        {"intimacy", std::string(to_string(pair.intimacy))},
                        {"dominance", std::string(to_string(pair.dominance))},
                        {"age_relation", std::string(to_string(pair.age_relation))},
                        {"primary_scenario", std::string(to_string(pair.primary_scenario))},
                        {"n", std::to_string(n)},
                        {"sentinel", std::string(kSectionSentinel)}})));
  return parse_scenarios(chat.send(req), n);
}

// --- JSON -----------------------------------------------------------------

using json_io::get_string;
using nlohmann::ordered_json;

ordered_json to_json(const NewsItem& n) {
  ordered_json j;
  j["topic"] = std::string(to_string(n.topic));
  j["title"] = n.title;
  j["text"] = n.text;
  return j;
}

NewsItem news_from_json(const nlohmann::json& j) {
  NewsItem n{parse_topic(get_string(j, "topic")), get_string(j, "title"), get_string(j, "text")};
  n.validate();
  return n;
}

namespace {
ordered_json profile_to_json(const RoleProfile& p) {
  ordered_json j;
  j["name"] = p.name;
  j["background"] = p.background;
  j["personality"] = p.personality;
  j["current_state"] = p.current_state;
  return j;
}

RoleProfile profile_from_json(const nlohmann::json& j) {
  return {get_string(j, "name"), get_string(j, "background"), get_string(j, "personality"),
          get_string(j, "current_state")};
}

const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

template <typename T, typename Parse>
std::vector<T> load_lines(const std::filesystem::path& path, Parse parse) {
  const std::string content = json_io::read_text_file(path);
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  std::vector<T> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no);
    } catch (const Error& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}
}  // namespace

ordered_json to_json(const RolePair& p) {
  ordered_json j;
  j["role_a"] = profile_to_json(p.role_a);
  j["role_b"] = profile_to_json(p.role_b);
  j["intimacy"] = std::string(to_string(p.intimacy));
  j["dominance"] = std::string(to_string(p.dominance));
  j["age_relation"] = std::string(to_string(p.age_relation));
  j["primary_scenario"] = std::string(to_string(p.primary_scenario));
  return j;
}

RolePair role_pair_from_json(const nlohmann::json& j) {
  RolePair p;
  p.role_a = profile_from_json(require(j, "role_a"));
  p.role_b = profile_from_json(require(j, "role_b"));
  p.intimacy = parse_intimacy(get_string(j, "intimacy"));
  p.dominance = parse_dominance(get_string(j, "dominance"));
  p.age_relation = parse_age_relation(get_string(j, "age_relation"));
  p.primary_scenario = parse_primary_scenario(get_string(j, "primary_scenario"));
  p.validate();
  return p;
}

ordered_json to_json(const Scenario& s) {
  ordered_json j;
  j["relationship_background"] = s.relationship_background;
  j["event_context"] = s.event_context;
  return j;
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s{get_string(j, "relationship_background"), get_string(j, "event_context")};
  s.validate();
  return s;
}

ordered_json to_json(const InitContext& ctx) {
  ordered_json j;
  j["kind"] = std::string(to_string(ctx.kind));
  if (const auto* n = std::get_if<NewsItem>(&ctx.payload)) {
    j["news"] = to_json(*n);
  } else {
    const auto& r = std::get<RoleSetup>(ctx.payload);
    j["role_pair"] = to_json(r.pair);
    j["scenario"] = to_json(r.scenario);
  }
  j["brief"] = ctx.brief;
  j["rendering"] = ctx.rendering;
  return j;
}

InitContext context_from_json(const nlohmann::json& j) {
  InitContext ctx;
  const std::string kind = get_string(j, "kind");
  if (kind == "news") {
    ctx.kind = ContextKind::news;
    ctx.payload = news_from_json(require(j, "news"));
  } else if (kind == "role") {
    ctx.kind = ContextKind::role;
    ctx.payload = RoleSetup{role_pair_from_json(require(j, "role_pair")),
                            scenario_from_json(require(j, "scenario"))};
  } else {
    throw ParseError("context kind must be news or role, got '" + kind + "'");
  }
  ctx.brief = get_string(j, "brief");
  ctx.rendering = get_string(j, "rendering");
  return ctx;
}

std::vector<NewsItem> load_news(const std::filesystem::path& path) {
  return load_lines<NewsItem>(path, [](const nlohmann::json& j) { return news_from_json(j); });
}

std::vector<RolePair> load_role_pairs(const std::filesystem::path& path) {
  return load_lines<RolePair>(path, [](const nlohmann::json& j) { return role_pair_from_json(j); });
}

}  // namespace memedial
