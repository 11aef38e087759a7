#include "memedial/aligner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "memedial/error.hpp"

namespace memedial {

void AlignerWeights::validate() const {
  for (double w : {scenario, penalty, implicit, motivation}) {
    if (!std::isfinite(w)) throw ValidationError("aligner weights must be finite");
  }
}

std::string_view to_string(ImplicitSign s) {
  return s == ImplicitSign::positive ? "positive" : "negative";
}

ImplicitSign parse_implicit_sign(std::string_view s) {
  if (s == "positive") return ImplicitSign::positive;
  if (s == "negative") return ImplicitSign::negative;
  throw ValidationError("implicit_sign must be positive or negative, got '" + std::string(s) + "'");
}

namespace {

const Vector& summary_vector(const std::optional<Vector>& v, const char* field) {
  if (!v) {
    throw MissingEmbeddingError(std::string("summary has no ") + field +
                                " embedding; embed the summary first");
  }
  return *v;
}

}  // namespace

ComponentScores component_scores(const TurnSummary& summary, const MemeRecord& record,
                                 ImplicitSign sign) {
  if (!record.embeddings) {
    throw MissingEmbeddingError("meme '" + record.id + "' has no embeddings; run `embed` first");
  }
  const Vector& scenario = summary_vector(summary.scenario_vec, "scenario");
  const Vector& emotion = summary_vector(summary.emotion_vec, "emotion");
  const Vector& motivation = summary_vector(summary.motivation_vec, "motivation");
  const MemeEmbeddings& e = *record.embeddings;

  ComponentScores c;
  c.alpha = cosine_similarity(scenario, e.s_plus);
  c.delta = -cosine_similarity(scenario, e.s_minus);
  const double implicit = cosine_similarity(emotion, e.emotion);
  c.beta = sign == ImplicitSign::positive ? implicit : -implicit;
  c.gamma = cosine_similarity(motivation, e.motivation);
  return c;
}

double total_score(const ComponentScores& c, const AlignerWeights& w) {
  double t = w.scenario * c.alpha;
  t += w.penalty * c.delta;
  t += w.implicit * c.beta;
  t += w.motivation * c.gamma;
  return t;
}

bool ranks_before(const ScoredMeme& a, const ScoredMeme& b) {
  if (a.total != b.total) return a.total > b.total;
  return a.meme_id < b.meme_id;
}

std::vector<ScoredMeme> score_all(const TurnSummary& summary, const MemeLibrary& lib,
                                  const AlignerWeights& weights, ImplicitSign sign) {
  std::vector<ScoredMeme> out;
  out.reserve(lib.size());
  for (const auto& r : lib.records) {
    ScoredMeme s;
    s.meme_id = r.id;
    s.components = component_scores(summary, r, sign);
    s.total = total_score(s.components, weights);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ScoredMeme> rank_top_k(const TurnSummary& summary, const MemeLibrary& lib,
                                   const AlignerWeights& weights, std::size_t k,
                                   ImplicitSign sign) {
  if (lib.empty()) throw ValidationError("cannot rank an empty meme library");
  if (k == 0) throw ValidationError("k must be >= 1");
  auto scored = score_all(summary, lib, weights, sign);
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(),
                    ranks_before);
  scored.resize(n);
  return scored;
}

void ThresholdParams::validate() const {
  if (!std::isfinite(theta0)) throw ValidationError("theta0 must be finite");
  if (!std::isfinite(delta) || delta < 0.0) throw ValidationError("delta must be >= 0");
  if (!std::isfinite(lambda) || lambda <= 0.0) throw ValidationError("lambda must be > 0");
}

std::optional<int> turns_since_last_meme(const ThresholdState& state, int t) {
  if (t < 1) throw ValidationError("turn index must be >= 1");
  if (!state.last_meme_turn) return std::nullopt;
  if (*state.last_meme_turn >= t) {
    throw ValidationError("last meme turn " + std::to_string(*state.last_meme_turn) +
                          " is not before turn " + std::to_string(t));
  }
  return t - *state.last_meme_turn;
}

double threshold_for_gap(const ThresholdParams& params, std::optional<int> k) {
  if (!k) return params.theta0;
  return params.theta0 + params.delta * std::exp(-params.lambda * static_cast<double>(*k));
}

double adaptive_threshold(const ThresholdState& state, int t) {
  return threshold_for_gap(state.params, turns_since_last_meme(state, t));
}

bool gate(double top_total, double threshold) { return top_total > threshold; }

std::string_view to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::greedy:
      return "greedy";
    case SelectionStrategy::sampling:
      return "sampling";
    case SelectionStrategy::random:
      return "random";
  }
  return "greedy";
}

SelectionStrategy parse_strategy(std::string_view s) {
  if (s == "greedy") return SelectionStrategy::greedy;
  if (s == "sampling") return SelectionStrategy::sampling;
  if (s == "random") return SelectionStrategy::random;
  throw ValidationError("strategy must be greedy, sampling or random, got '" + std::string(s) +
                        "'");
}

const ScoredMeme& select_meme(std::span<const ScoredMeme> top_k, SelectionStrategy strategy,
                              SessionRng& rng) {
  if (top_k.empty()) throw ValidationError("cannot select from an empty candidate list");
  switch (strategy) {
    case SelectionStrategy::greedy:
      return top_k.front();
    case SelectionStrategy::sampling:
      return top_k[rng.uniform_index(top_k.size())];
    case SelectionStrategy::random:
      break;
  }
  throw ValidationError("the random strategy does not select from ranked candidates");
}

std::size_t ScoreHistogram::total() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

std::size_t ScoreHistogram::significant_peaks(double sigma) const {
  // Collapse plateaus into runs so a flat top counts once.
  std::vector<double> runs;
  for (auto c : counts) {
    const double v = static_cast<double>(c);
    if (runs.empty() || runs.back() != v) runs.push_back(v);
  }
  std::size_t peaks = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const double h = runs[i];
    const bool left_lower = i == 0 || runs[i - 1] < h;
    const bool right_lower = i + 1 == runs.size() || runs[i + 1] < h;
    if (!left_lower || !right_lower || h == 0.0) continue;
    // Ties: an equal peak to the left counts as higher, so a split summit
    // is counted once.
    double left_min = h, right_min = h;
    for (std::size_t j = i; j-- > 0 && runs[j] < h;) left_min = std::min(left_min, runs[j]);
    for (std::size_t j = i + 1; j < runs.size() && runs[j] <= h; ++j) {
      right_min = std::min(right_min, runs[j]);
    }
    // Edge peaks only have one side to descend on.
    const double base = (i == 0)                 ? right_min
                        : (i + 1 == runs.size()) ? left_min
                                                 : std::max(left_min, right_min);
    if (h - base > sigma * std::sqrt(h)) ++peaks;
  }
  return peaks;
}

std::string ScoreHistogram::to_tsv() const {
  std::string out = "bin_lo\tbin_hi\tcount\n";
  char buf[96];
  for (std::size_t i = 0; i < counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f\t%zu\n", edges[i], edges[i + 1], counts[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "# n=%zu mean=%.6f stddev=%.6f\n", total(), mean, stddev);
  out += buf;
  return out;
}

ScoreHistogram histogram_of(std::span<const double> values, std::size_t bins) {
  if (values.empty()) throw ValidationError("histogram needs at least one value");
  if (bins == 0) throw ValidationError("histogram needs at least one bin");
  ScoreHistogram h;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  h.min = *lo;
  h.max = *hi;
  const double width = (h.max - h.min) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = h.min + width * static_cast<double>(i);
  h.edges[bins] = h.max;
  h.counts.assign(bins, 0);
  double sum = 0.0;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>((v - h.min) / width);
      if (b >= bins) b = bins - 1;  // the maximum lands in the last bin
    }
    ++h.counts[b];
    sum += v;
  }
  const double n = static_cast<double>(values.size());
  h.mean = sum / n;
  double sq = 0.0;
  for (double v : values) sq += (v - h.mean) * (v - h.mean);
  h.stddev = std::sqrt(sq / n);
  return h;
}

ScoreHistogram score_distribution(const MemeLibrary& lib, std::span<const TurnSummary> summaries,
                                  const AlignerWeights& weights, ImplicitSign sign,
                                  std::size_t bins) {
  if (lib.empty() || summaries.empty()) {
    throw ValidationError("score distribution needs a non-empty library and >= 1 summary");
  }
  std::vector<double> totals;
  totals.reserve(lib.size() * summaries.size());
  for (const auto& s : summaries) {
    for (const auto& scored : score_all(s, lib, weights, sign)) totals.push_back(scored.total);
  }
  return histogram_of(totals, bins);
}

void AlignerConfig::validate() const {
  weights.validate();
  threshold.validate();
  if (top_k == 0) throw ValidationError("top_k must be >= 1");
}

}  // namespace memedial
