#include "memedial/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <regex>

#include "memedial/error.hpp"
#include "memedial/text.hpp"

namespace memedial {

ConsistencyScore consistency_from_cosine(double cosine) {
  return {cosine, (cosine + 1.0) / 2.0 * 100.0};
}

ConsistencyScore consistency_score(const Bytes& meme_image, std::string_view reply_text,
                                   EmbeddingBackend& backend) {
  const Vector image = backend.embed_image(meme_image);
  const Vector text = backend.embed(reply_text);
  return consistency_from_cosine(cosine_similarity(image, text));
}

ImageResolver library_image_resolver(const MemeLibrary& lib, std::filesystem::path image_dir) {
  std::map<std::string, std::string> paths;
  for (const auto& r : lib.records) paths[r.id] = r.image_path;
  return [paths = std::move(paths), dir = std::move(image_dir)](const std::string& id) {
    const auto it = paths.find(id);
    if (it == paths.end()) throw ValidationError("meme '" + id + "' is not in the library");
    return read_file_bytes((dir / it->second).string());
  };
}

ConsistencyReport evaluate_consistency(std::span<const DialogueSession> sessions,
                                       const ImageResolver& images, EmbeddingBackend& backend) {
  ConsistencyReport report;
  double sum = 0.0;
  for (const auto& s : sessions) {
    for (std::size_t i = 0; i < s.turns.size(); ++i) {
      const auto& turn = s.turns[i];
      if (!turn.meme_id) continue;
      if (i + 1 >= s.turns.size()) {
        report.skipped.push_back(
            {s.session_id, turn.index, *turn.meme_id, "meme on the final turn has no reply"});
        continue;
      }
      ConsistencyRecord rec{s.session_id, turn.index, *turn.meme_id, s.strategy,
                            consistency_score(images(*turn.meme_id), s.turns[i + 1].text, backend)};
      sum += rec.score.scaled;
      report.scored.push_back(std::move(rec));
    }
  }
  report.count = report.scored.size();
  if (report.count == 0) throw ValidationError("no meme with a following reply to score");
  report.mean = sum / static_cast<double>(report.count);
  return report;
}

ConsistencyReport evaluate_dataset_consistency(const std::filesystem::path& dataset_dir,
                                               const ImageResolver& images,
                                               EmbeddingBackend& backend) {
  const auto sessions = load_dataset_sessions(dataset_dir);
  return evaluate_consistency(sessions, images, backend);
}

JudgeScore parse_judge_scores(const std::string& response) {
  static const std::regex number(R"([-+]?\d+(?:\.\d+)?)");
  std::vector<double> values;
  for (auto it = std::sregex_iterator(response.begin(), response.end(), number);
       it != std::sregex_iterator(); ++it) {
    values.push_back(std::strtod(it->str().c_str(), nullptr));
  }
  if (values.size() != 5) {
    throw FormatError("judge response has " + std::to_string(values.size()) +
                          " scores, expected 5",
                      response);
  }
  JudgeScore s;
  for (double& v : values) {
    const double c = std::clamp(v, 0.0, 100.0);
    if (c != v) s.clamped = true;
    v = c;
  }
  s.semantic = values[0];
  s.emotional = values[1];
  s.contextual = values[2];
  s.humor = values[3];
  s.coherence = values[4];
  s.mean = (s.semantic + s.emotional + s.contextual + s.humor + s.coherence) / 5.0;
  return s;
}

ChatRequest build_judge_request(const DialogueSession& session, int target_turn,
                                const ImageResolver& images, const TemplateSet& templates) {
  const auto target = std::find_if(session.turns.begin(), session.turns.end(),
                                   [&](const auto& t) { return t.index == target_turn; });
  if (target == session.turns.end() || !target->meme_id) {
    throw ValidationError("turn " + std::to_string(target_turn) + " of session '" +
                          session.session_id + "' carries no meme");
  }
  Message msg;
  msg.role = Role::user;
  msg.parts.push_back(ContentPart::of_text(templates.render(
      "judge", {{"turn", std::to_string(target_turn)},
                {"speaker", std::string(to_string(target->speaker))}})));
  for (const auto& t : session.turns) {
    const std::string label = "第" + std::to_string(t.index) + "轮 " +
                              std::string(to_string(t.speaker)) + "：";
    msg.parts.push_back(ContentPart::of_text(label + t.text));
    if (t.meme_id) {
      Bytes img = images(*t.meme_id);
      const std::string mime = image_mime_type(img);
      msg.parts.push_back(ContentPart::of_text(
          label + (t.index == target_turn ? "【待评价表情包】" : "[表情包]")));
      msg.parts.push_back(ContentPart::of_image(std::move(img), mime));
    }
  }
  ChatRequest req;
  req.task = "judge";
  req.params = {{"turn", std::to_string(target_turn)}};
  req.messages.push_back(std::move(msg));
  return req;
}

std::vector<JudgedMeme> judge_dialogue(const DialogueSession& session, const ImageResolver& images,
                                       VisionBackend& judge, const TemplateSet& templates) {
  std::vector<JudgedMeme> out;
  for (const auto& t : session.turns) {
    if (!t.meme_id) continue;
    const auto req = build_judge_request(session, t.index, images, templates);
    out.push_back({t.index, *t.meme_id, parse_judge_scores(judge.send(req))});
  }
  if (out.empty()) {
    throw ValidationError("session '" + session.session_id + "' contains no meme to judge");
  }
  return out;
}

DialogueSession random_baseline(DialogueSession session, const MemeLibrary& lib, SessionRng& rng) {
  if (lib.empty()) throw ValidationError("random baseline needs a non-empty library");
  for (auto& t : session.turns) {
    t.meme_id.reset();
    t.retrieval.reset();
    if (t.index < 2) continue;
    if (rng.coin()) t.meme_id = lib.records[rng.uniform_index(lib.size())].id;
  }
  session.strategy = "random";
  return session;
}

namespace {
std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
}  // namespace

std::string report_tsv(std::span<const EvaluationRow> rows) {
  std::string out =
      "dataset\tsession\tturn\tmeme_id\tstrategy\tconsistency_cosine\tconsistency\t"
      "semantic\temotional\tcontextual\thumor\tcoherence\tjudge_mean\tjudge_clamped\n";
  for (const auto& r : rows) {
    out += r.dataset + "\t" + r.session_id + "\t" + std::to_string(r.turn) + "\t" + r.meme_id +
           "\t" + r.strategy + "\t";
    if (r.consistency) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", r.consistency->cosine);
      out += std::string(buf) + "\t" + fmt2(r.consistency->scaled) + "\t";
    } else {
      out += "\t\t";
    }
    if (r.judge) {
      const auto& j = *r.judge;
      out += fmt2(j.semantic) + "\t" + fmt2(j.emotional) + "\t" + fmt2(j.contextual) + "\t" +
             fmt2(j.humor) + "\t" + fmt2(j.coherence) + "\t" + fmt2(j.mean) + "\t" +
             (j.clamped ? "1" : "0");
    } else {
      out += "\t\t\t\t\t\t";
    }
    out += "\n";
  }
  return out;
}

std::string summary_table(std::span<const EvaluationRow> rows) {
  struct Acc {
    double judge = 0, consistency = 0;
    std::size_t n_judge = 0, n_consistency = 0;
  };
  std::map<std::pair<std::string, std::string>, Acc> acc;
  for (const auto& r : rows) {
    auto& a = acc[{r.dataset, r.strategy}];
    if (r.judge) {
      a.judge += r.judge->mean;
      ++a.n_judge;
    }
    if (r.consistency) {
      a.consistency += r.consistency->scaled;
      ++a.n_consistency;
    }
  }
  std::string out = "dataset\tstrategy\tllm_judge\tsemantic_consistency\tn_judge\tn_consistency\n";
  for (const auto& [key, a] : acc) {
    out += key.first + "\t" + key.second + "\t" +
           (a.n_judge ? fmt2(a.judge / static_cast<double>(a.n_judge)) : "-") + "\t" +
           (a.n_consistency ? fmt2(a.consistency / static_cast<double>(a.n_consistency)) : "-") +
           "\t" + std::to_string(a.n_judge) + "\t" + std::to_string(a.n_consistency) + "\n";
  }
  return out;
}

}  // namespace memedial
