#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "memedial/dialogue.hpp"
#include "memedial/meme_library.hpp"
#include "memedial/rng.hpp"

namespace memedial {

// Weights of the four retrieval components, applied in the order
// scenario match, scenario penalty, implicit match, motivation.
struct AlignerWeights {
  double scenario = 0.25;
  double penalty = 0.25;
  double implicit = 0.25;
  double motivation = 0.25;
  void validate() const;
  friend bool operator==(const AlignerWeights&, const AlignerWeights&) = default;
};

// Sign applied to the implicit-semantics cosine. `positive` rewards emotional
// fit; `negative` reproduces the literal negated formula.
enum class ImplicitSign { positive, negative };
std::string_view to_string(ImplicitSign s);
ImplicitSign parse_implicit_sign(std::string_view s);

struct ComponentScores {
  double alpha = 0.0;  // cos(scenario, S+)
  double delta = 0.0;  // -cos(scenario, S-)
  double beta = 0.0;   // +/- cos(emotion, E)
  double gamma = 0.0;  // cos(motivation, Psi)
  friend bool operator==(const ComponentScores&, const ComponentScores&) = default;
};

struct ScoredMeme {
  std::string meme_id;
  ComponentScores components;
  double total = 0.0;
  friend bool operator==(const ScoredMeme&, const ScoredMeme&) = default;
};

// Throws MissingEmbeddingError when the summary or record lacks vectors and
// DimensionError when their sizes differ.
ComponentScores component_scores(const TurnSummary& summary, const MemeRecord& record,
                                 ImplicitSign sign = ImplicitSign::positive);

// w1*alpha + w2*delta + w3*beta + w4*gamma, accumulated in that order.
double total_score(const ComponentScores& c, const AlignerWeights& w);

// Ranking order: total descending, then meme id ascending.
bool ranks_before(const ScoredMeme& a, const ScoredMeme& b);

// Scores every record, in library order.
std::vector<ScoredMeme> score_all(const TurnSummary& summary, const MemeLibrary& lib,
                                  const AlignerWeights& weights,
                                  ImplicitSign sign = ImplicitSign::positive);

// The min(k, N) best records in ranking order.
std::vector<ScoredMeme> rank_top_k(const TurnSummary& summary, const MemeLibrary& lib,
                                   const AlignerWeights& weights, std::size_t k,
                                   ImplicitSign sign = ImplicitSign::positive);

// --- Turn-aware threshold -------------------------------------------------

struct ThresholdParams {
  double theta0 = 0.7;  // base threshold
  double delta = 0.2;   // penalty right after a meme
  double lambda = 1.0;  // decay rate
  void validate() const;
  friend bool operator==(const ThresholdParams&, const ThresholdParams&) = default;
};

struct ThresholdState {
  ThresholdParams params;
  std::optional<int> last_meme_turn;
};

// Turns since the last meme, or nullopt when none was sent yet.
std::optional<int> turns_since_last_meme(const ThresholdState& state, int t);

// theta0 + delta * exp(-lambda * k); exactly theta0 when k is unset.
double threshold_for_gap(const ThresholdParams& params, std::optional<int> k);
double adaptive_threshold(const ThresholdState& state, int t);

// A meme is sent only when the top total strictly exceeds the threshold.
bool gate(double top_total, double threshold);

// --- Selection ------------------------------------------------------------

enum class SelectionStrategy { greedy, sampling, random };
std::string_view to_string(SelectionStrategy s);
SelectionStrategy parse_strategy(std::string_view s);

// Greedy takes the first candidate; sampling draws uniformly from the list.
const ScoredMeme& select_meme(std::span<const ScoredMeme> top_k, SelectionStrategy strategy,
                              SessionRng& rng);

// --- Score distribution ---------------------------------------------------

struct ScoreHistogram {
  std::vector<double> edges;        // bins + 1 edges
  std::vector<std::size_t> counts;  // one per bin
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  double min = 0.0;
  double max = 0.0;

  std::size_t total() const;
  // Local maxima whose topographic prominence exceeds `sigma` Poisson
  // standard deviations of their own count.
  std::size_t significant_peaks(double sigma = 3.0) const;
  // Tab-separated table: bin_lo, bin_hi, count; then mean/stddev comment lines.
  std::string to_tsv() const;
};

inline constexpr std::size_t kHistogramBins = 50;

ScoreHistogram histogram_of(std::span<const double> values, std::size_t bins = kHistogramBins);

ScoreHistogram score_distribution(const MemeLibrary& lib, std::span<const TurnSummary> summaries,
                                  const AlignerWeights& weights,
                                  ImplicitSign sign = ImplicitSign::positive,
                                  std::size_t bins = kHistogramBins);

// Everything the retrieval step needs for one session.
struct AlignerConfig {
  AlignerWeights weights;
  ImplicitSign implicit_sign = ImplicitSign::positive;
  ThresholdParams threshold;
  std::size_t top_k = 3;
  SelectionStrategy strategy = SelectionStrategy::greedy;
  void validate() const;
  friend bool operator==(const AlignerConfig&, const AlignerConfig&) = default;
};

}  // namespace memedial
