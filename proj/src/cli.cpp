#include "memedial/cli.hpp"

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "memedial/aligner.hpp"
#include "memedial/error.hpp"
#include "memedial/evaluation.hpp"
#include "memedial/json_io.hpp"
#include "memedial/meme_library.hpp"
#include "memedial/pipeline.hpp"
#include "memedial/session.hpp"
#include "memedial/text.hpp"

namespace memedial::cli {

namespace {

const std::filesystem::path kDataDir = MEMEDIAL_DATA_DIR;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool mock = false;
  bool verbose = false;
};

struct AlignerFlags {
  std::optional<std::size_t> k;
  std::optional<std::string> strategy;
  std::optional<double> theta0, delta, lambda;
  std::optional<std::string> weights;
  std::optional<std::string> implicit_sign;
};

void add_aligner_flags(CLI::App* app, AlignerFlags& f) {
  app->add_option("--k", f.k, "Number of ranked candidates")->check(CLI::PositiveNumber);
  app->add_option("--strategy", f.strategy, "greedy, sampling or random")
      ->check(CLI::IsMember({"greedy", "sampling", "random"}));
  app->add_option("--theta0", f.theta0, "Base threshold");
  app->add_option("--delta", f.delta, "Threshold penalty right after a meme");
  app->add_option("--lambda", f.lambda, "Threshold decay rate");
  app->add_option("--weights", f.weights, "Four comma-separated weights w1,w2,w3,w4");
  app->add_option("--implicit-sign", f.implicit_sign, "positive or negative")
      ->check(CLI::IsMember({"positive", "negative"}));
}

AlignerWeights parse_weights(const std::string& s) {
  std::vector<double> w;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const std::string t = trim(item);
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || *end != '\0') throw ValidationError("weight '" + item + "' is not a number");
    w.push_back(v);
  }
  if (w.size() != 4) throw ValidationError("--weights needs exactly 4 comma-separated values");
  return {w[0], w[1], w[2], w[3]};
}

void apply_aligner_flags(const AlignerFlags& f, AlignerConfig& a) {
  if (f.k) a.top_k = *f.k;
  if (f.strategy) a.strategy = parse_strategy(*f.strategy);
  if (f.theta0) a.threshold.theta0 = *f.theta0;
  if (f.delta) a.threshold.delta = *f.delta;
  if (f.lambda) a.threshold.lambda = *f.lambda;
  if (f.weights) a.weights = parse_weights(*f.weights);
  if (f.implicit_sign) a.implicit_sign = parse_implicit_sign(*f.implicit_sign);
  a.validate();
}

PipelineConfig base_config(const GlobalOptions& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : load_pipeline_config(g.config);
  if (cfg.library_path.empty()) cfg.library_path = kDataDir / "sample_library.jsonl";
  if (cfg.news_path.empty()) cfg.news_path = kDataDir / "news.jsonl";
  if (cfg.roles_path.empty()) cfg.roles_path = kDataDir / "roles.jsonl";
  if (g.seed) cfg.seed = *g.seed;
  if (g.mock) cfg.mock = true;
  network::set_allowed(!cfg.mock);
  return cfg;
}

TemplateSet templates_for(const PipelineConfig& cfg) {
  return cfg.templates_dir.empty() ? TemplateSet::builtin()
                                   : TemplateSet::load_directory(cfg.templates_dir);
}

std::ostream* log_stream = nullptr;

void log(const std::string& msg) {
  if (log_stream) *log_stream << msg << "\n";
}

std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- annotate -------------------------------------------------------------

struct AnnotateArgs {
  std::string images;
  std::string out;
  std::size_t workers = 4;
};

void cmd_annotate(const GlobalOptions& g, const AnnotateArgs& a, std::ostream& out,
                  std::ostream& err) {
  const auto cfg = base_config(g);
  auto backends = make_backends(cfg);
  const auto templates = templates_for(cfg);
  log("annotating images in " + a.images);
  auto result = annotate_library(a.images, *backends.vision, a.workers, templates);
  for (const auto& f : result.failures) err << "warning: " << f.file << ": " << f.message << "\n";
  save_library(result.library, a.out);
  out << "annotated " << result.library.size() << " memes, " << result.failures.size()
      << " failed -> " << a.out << "\n";
}

// --- embed ----------------------------------------------------------------

struct EmbedArgs {
  std::string library;
  std::string out;
  std::size_t workers = 4;
};

void cmd_embed(const GlobalOptions& g, const EmbedArgs& a, std::ostream& out) {
  auto cfg = base_config(g);
  if (!a.library.empty()) cfg.library_path = a.library;
  auto backends = make_backends(cfg);
  const auto lib = load_library(cfg.library_path);
  log("embedding " + std::to_string(lib.size()) + " memes");
  const auto embedded = embed_library(lib, *backends.embedding, a.workers);
  const std::string dest = a.out.empty() ? cfg.library_path.string() : a.out;
  save_library(embedded, dest);
  out << "embedded " << embedded.size() << " memes (dim " << backends.embedding->dim() << ") -> "
      << dest << "\n";
}

// --- generate -------------------------------------------------------------

struct GenerateArgs {
  std::optional<std::string> out, library, news, roles, mode;
  std::optional<int> turns;
  std::optional<std::size_t> sessions, workers;
  AlignerFlags aligner;
};

void cmd_generate(const GlobalOptions& g, const GenerateArgs& a, std::ostream& out) {
  auto cfg = base_config(g);
  if (a.out) cfg.output_dir = *a.out;
  if (a.library) cfg.library_path = *a.library;
  if (a.news) cfg.news_path = *a.news;
  if (a.roles) cfg.roles_path = *a.roles;
  if (a.mode) cfg.mode = parse_mode(*a.mode);
  if (a.turns) cfg.turns = *a.turns;
  if (a.sessions) cfg.sessions = *a.sessions;
  if (a.workers) cfg.workers = *a.workers;
  apply_aligner_flags(a.aligner, cfg.aligner);
  cfg.validate();

  auto backends = make_backends(cfg);
  const auto templates = templates_for(cfg);
  const auto lib = load_library(cfg.library_path);
  lib.validate();
  const auto contexts = prepare_contexts(cfg, *backends.chat, templates);
  log("prepared " + std::to_string(contexts.size()) + " contexts");
  const auto result = run_batch(cfg, lib, contexts, *backends.chat, *backends.embedding, templates);
  std::size_t memes = 0, turns = 0;
  for (const auto& s : result.sessions) {
    memes += s.meme_count();
    turns += s.turns.size();
  }
  out << "generated " << result.ok << " sessions (" << result.failed << " failed), " << turns
      << " turns, " << memes << " memes -> " << cfg.output_dir.string() << "\n";
  if (result.ok == 0) throw BackendError("every session failed");
}

// --- retrieve -------------------------------------------------------------

struct RetrieveArgs {
  std::optional<std::string> library;
  std::string history_file;
  std::vector<std::string> utterances;
  std::optional<std::string> scenario, emotion, motivation;
  std::optional<int> since;
  AlignerFlags aligner;
};

void cmd_retrieve(const GlobalOptions& g, const RetrieveArgs& a, std::ostream& out) {
  auto cfg = base_config(g);
  if (a.library) cfg.library_path = *a.library;
  apply_aligner_flags(a.aligner, cfg.aligner);
  if (cfg.aligner.strategy == SelectionStrategy::random) {
    throw ValidationError("retrieve ranks candidates; use greedy or sampling");
  }
  const auto lib = load_library(cfg.library_path);
  if (!lib.fully_embedded()) {
    throw MissingEmbeddingError("library '" + cfg.library_path.string() +
                                "' has no embeddings; run `memedial embed` first");
  }
  const bool direct = a.scenario || a.emotion || a.motivation;
  std::vector<std::string> history = a.utterances;
  if (!a.history_file.empty()) {
    std::istringstream in(json_io::read_text_file(a.history_file));
    for (std::string line; std::getline(in, line);) {
      if (!trim(line).empty()) history.push_back(trim(line));
    }
  }
  if (direct && !history.empty()) {
    throw ValidationError("give either the summary texts or a history, not both");
  }
  if (direct && !(a.scenario && a.emotion && a.motivation)) {
    throw ValidationError("--scenario, --emotion and --motivation must be given together");
  }
  if (!direct && history.empty()) {
    throw ValidationError(
        "retrieve needs --scenario/--emotion/--motivation, --history or --utterance");
  }

  auto backends = make_backends(cfg);
  const auto templates = templates_for(cfg);
  const int t = direct ? 2 : static_cast<int>(history.size()) + 1;
  TurnSummary raw;
  if (direct) {
    raw.scenario = *a.scenario;
    raw.emotion = *a.emotion;
    raw.motivation = *a.motivation;
  } else {
    raw = summarize(history, speaker_for_turn(t), *backends.chat, templates);
  }
  const auto summary = embed_summary(std::move(raw), *backends.embedding);
  const auto top = rank_top_k(summary, lib, cfg.aligner.weights, cfg.aligner.top_k,
                              cfg.aligner.implicit_sign);

  out << "scenario\t" << summary.scenario << "\n";
  out << "emotion\t" << summary.emotion << "\n";
  out << "motivation\t" << summary.motivation << "\n\n";
  out << "rank\tid\talpha\tdelta\tbeta\tgamma\tT\n";
  for (std::size_t i = 0; i < top.size(); ++i) {
    const auto& c = top[i].components;
    out << i + 1 << "\t" << top[i].meme_id << "\t" << fmt("%.4f", c.alpha) << "\t"
        << fmt("%.4f", c.delta) << "\t" << fmt("%.4f", c.beta) << "\t" << fmt("%.4f", c.gamma)
        << "\t" << fmt("%.4f", top[i].total) << "\n";
  }
  ThresholdState state{cfg.aligner.threshold, std::nullopt};
  if (a.since) {
    if (*a.since < 1 || *a.since >= t) {
      throw ValidationError("--since must be in [1, " + std::to_string(t - 1) + "]");
    }
    state.last_meme_turn = t - *a.since;
  }
  const double theta = adaptive_threshold(state, t);
  const bool send = gate(top.front().total, theta);
  out << "\nturn\t" << t << "\nthreshold\t" << fmt("%.4f", theta) << "\ngate\t"
      << (send ? "send" : "skip") << "\n";
  if (send) {
    SessionRng rng(derive_seed(cfg.seed, 0));
    out << "selected\t" << select_meme(top, cfg.aligner.strategy, rng).meme_id << "\n";
  }
}

// --- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::vector<std::string> datasets;
  std::optional<std::string> library;
  std::string images;
  std::string out;
  bool judge = false;
  bool baseline = false;
};

void cmd_evaluate(const GlobalOptions& g, const EvaluateArgs& a, std::ostream& out,
                  std::ostream& err) {
  auto cfg = base_config(g);
  if (a.library) cfg.library_path = *a.library;
  const auto lib = load_library(cfg.library_path);
  const auto images = library_image_resolver(lib, a.images.empty() ? kDataDir / "images"
                                                                   : std::filesystem::path(a.images));
  auto backends = make_backends(cfg);
  const auto templates = templates_for(cfg);

  std::vector<EvaluationRow> rows;
  for (const auto& dir : a.datasets) {
    const std::string name = std::filesystem::path(dir).lexically_normal().filename().string();
    auto sessions = load_dataset_sessions(dir);
    if (a.baseline) {
      const std::size_t n = sessions.size();
      for (std::size_t i = 0; i < n; ++i) {
        SessionRng rng(derive_seed(cfg.seed, sessions[i].seed));
        sessions.push_back(random_baseline(sessions[i], lib, rng));
      }
    }
    for (const auto& s : sessions) {
      std::map<int, JudgeScore> judged;
      if (a.judge && s.meme_count() > 0) {
        for (const auto& j : judge_dialogue(s, images, *backends.vision, templates)) {
          judged[j.turn] = j.score;
        }
      }
      for (std::size_t i = 0; i < s.turns.size(); ++i) {
        const auto& turn = s.turns[i];
        if (!turn.meme_id) continue;
        EvaluationRow row{name, s.session_id, turn.index, *turn.meme_id, s.strategy, {}, {}};
        if (i + 1 < s.turns.size()) {
          row.consistency =
              consistency_score(images(*turn.meme_id), s.turns[i + 1].text, *backends.embedding);
        } else {
          err << "note: " << s.session_id << " turn " << turn.index
              << ": meme on the final turn has no reply, consistency skipped\n";
        }
        if (const auto it = judged.find(turn.index); it != judged.end()) row.judge = it->second;
        rows.push_back(std::move(row));
      }
    }
    log("evaluated dataset " + name);
  }
  if (rows.empty()) throw ValidationError("the datasets contain no memes to evaluate");
  if (!a.out.empty()) {
    json_io::write_text_file(a.out, report_tsv(rows));
    log("report written to " + a.out);
  }
  out << summary_table(rows);
}

// --- stats ----------------------------------------------------------------

struct StatsArgs {
  std::optional<std::string> library;
  std::vector<std::string> dimensions;
  std::string stopwords;
  std::size_t top = 20;
  std::vector<std::string> score_datasets;
  std::size_t bins = kHistogramBins;
  AlignerFlags aligner;
};

void cmd_stats(const GlobalOptions& g, const StatsArgs& a, std::ostream& out) {
  auto cfg = base_config(g);
  if (a.library) cfg.library_path = *a.library;
  apply_aligner_flags(a.aligner, cfg.aligner);
  const auto lib = load_library(cfg.library_path);

  if (!a.score_datasets.empty()) {
    std::vector<TurnSummary> summaries;
    for (const auto& dir : a.score_datasets) {
      for (const auto& s : load_dataset_sessions(dir)) {
        for (const auto& t : s.turns) {
          if (t.retrieval) summaries.push_back(t.retrieval->summary);
        }
      }
    }
    if (summaries.empty()) throw ValidationError("the datasets carry no retrieval summaries");
    const auto h = score_distribution(lib, summaries, cfg.aligner.weights,
                                      cfg.aligner.implicit_sign, a.bins);
    out << h.to_tsv();
    out << "# significant_peaks=" << h.significant_peaks() << "\n";
    return;
  }

  const StopTokens stop = load_stop_tokens(
      (a.stopwords.empty() ? kDataDir / "stopwords.txt" : std::filesystem::path(a.stopwords))
          .string());
  std::vector<Dimension> dims;
  for (const auto& d : a.dimensions) dims.push_back(parse_dimension(d));
  if (dims.empty()) dims.assign(kAllDimensions.begin(), kAllDimensions.end());
  for (const auto d : dims) {
    const auto table = keyword_stats(lib, d, stop);
    out << "# " << to_string(d) << "\n";
    for (std::size_t i = 0; i < table.entries.size() && i < a.top; ++i) {
      out << table.entries[i].first << "\t" << table.entries[i].second << "\n";
    }
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Meme-augmented dialogue generation and evaluation"};
  app.name("memedial");
  app.require_subcommand(1);
  // Global flags are also accepted after the subcommand name.
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--config", g.config, "Pipeline config file (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Global seed");
  app.add_flag("--mock", g.mock, "Use deterministic offline backends (no network)");
  app.add_flag("--verbose,-v", g.verbose, "Progress messages on stderr");

  AnnotateArgs annotate;
  auto* c_annotate = app.add_subcommand("annotate", "Annotate a directory of meme images");
  c_annotate->add_option("--images", annotate.images, "Image directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_annotate->add_option("--out", annotate.out, "Library file to write")->required();
  c_annotate->add_option("--workers", annotate.workers, "Concurrent requests")
      ->check(CLI::PositiveNumber);

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "Embed the annotation texts of a library");
  c_embed->add_option("--library", embed.library, "Library file");
  c_embed->add_option("--out", embed.out, "Output file (default: overwrite the library)");
  c_embed->add_option("--workers", embed.workers, "Concurrent requests")
      ->check(CLI::PositiveNumber);

  GenerateArgs generate;
  auto* c_generate = app.add_subcommand("generate", "Generate a dialogue dataset");
  c_generate->add_option("--out", generate.out, "Output directory");
  c_generate->add_option("--library", generate.library, "Embedded meme library");
  c_generate->add_option("--news", generate.news, "News items (JSONL)");
  c_generate->add_option("--roles", generate.roles, "Role pairs (JSONL)");
  c_generate->add_option("--mode", generate.mode, "news or role")
      ->check(CLI::IsMember({"news", "role"}));
  c_generate->add_option("--turns", generate.turns, "Turns per session")
      ->check(CLI::PositiveNumber);
  c_generate->add_option("--sessions", generate.sessions, "Number of sessions")
      ->check(CLI::PositiveNumber);
  c_generate->add_option("--workers", generate.workers, "Sessions run in parallel")
      ->check(CLI::PositiveNumber);
  add_aligner_flags(c_generate, generate.aligner);

  RetrieveArgs retrieve;
  auto* c_retrieve = app.add_subcommand("retrieve", "Rank memes for a dialogue history");
  c_retrieve->add_option("--library", retrieve.library, "Embedded meme library");
  c_retrieve->add_option("--history", retrieve.history_file, "One utterance per line")
      ->check(CLI::ExistingFile);
  c_retrieve->add_option("--utterance", retrieve.utterances, "Utterance (repeatable, in order)");
  c_retrieve->add_option("--scenario", retrieve.scenario, "Summary: current scenario");
  c_retrieve->add_option("--emotion", retrieve.emotion, "Summary: emotion");
  c_retrieve->add_option("--motivation", retrieve.motivation, "Summary: motivation");
  c_retrieve->add_option("--since", retrieve.since, "Turns since the last meme");
  add_aligner_flags(c_retrieve, retrieve.aligner);

  EvaluateArgs evaluate;
  auto* c_evaluate = app.add_subcommand("evaluate", "Score generated datasets");
  c_evaluate->add_option("--dataset", evaluate.datasets, "Dataset directory (repeatable)")
      ->required()
      ->check(CLI::ExistingDirectory);
  c_evaluate->add_option("--library", evaluate.library, "Meme library");
  c_evaluate->add_option("--images", evaluate.images, "Meme image directory");
  c_evaluate->add_option("--out", evaluate.out, "Per-meme report (TSV)");
  c_evaluate->add_flag("--judge", evaluate.judge, "Also run the LLM judge");
  c_evaluate->add_flag("--baseline", evaluate.baseline, "Also score a random-placement control");

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Library keyword counts or score distribution");
  c_stats->add_option("--library", stats.library, "Meme library");
  c_stats->add_option("--dimension", stats.dimensions, "s_plus, s_minus, emotion or motivation");
  c_stats->add_option("--stopwords", stats.stopwords, "Stop-token file");
  c_stats->add_option("--top", stats.top, "Rows per dimension");
  c_stats->add_option("--scores", stats.score_datasets,
                      "Histogram of totals over the retrieval summaries of these datasets");
  c_stats->add_option("--bins", stats.bins, "Histogram bins")->check(CLI::PositiveNumber);
  add_aligner_flags(c_stats, stats.aligner);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  log_stream = g.verbose ? &err : nullptr;
  try {
    if (c_annotate->parsed()) cmd_annotate(g, annotate, out, err);
    if (c_embed->parsed()) cmd_embed(g, embed, out);
    if (c_generate->parsed()) cmd_generate(g, generate, out);
    if (c_retrieve->parsed()) cmd_retrieve(g, retrieve, out);
    if (c_evaluate->parsed()) cmd_evaluate(g, evaluate, out, err);
    if (c_stats->parsed()) cmd_stats(g, stats, out);
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace memedial::cli
