#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nrt/error.hpp"

namespace nrt::metrics {

class MetricError : public Error {
 public:
  using Error::Error;
};

/// Bumped whenever tokenization or any metric definition changes. Recorded in
/// every result file.
inline constexpr std::string_view kMetricsVersion =
    "nrt-metrics/1 (tokens: lower+strip-punct+split-slash; bleu: max_n=4, eps=0.1; ter: no shifts; meteor: exact)";

/// Numerator used for n-gram orders >= 2 that have no clipped match:
/// p_n = kBleuEpsilon / (candidate n-gram count).
inline constexpr double kBleuEpsilon = 0.1;

using Tokens = std::vector<std::string>;
using TokenSpan = std::span<const std::string>;

/// Lowercases, splits on whitespace and '/', strips leading and trailing
/// punctuation from each piece, and drops pieces that end up empty.
Tokens tokenize(std::string_view text);

/// Smoothed sentence BLEU. Orders above the candidate length are skipped; a
/// candidate with no unigram match scores exactly 0.
double bleu_sentence(TokenSpan candidate, TokenSpan reference, int max_n = 4);

/// Corpus BLEU: clipped counts and lengths summed over all pairs before the
/// precisions and brevity penalty are formed. Same smoothing as the sentence
/// variant.
double bleu_corpus(std::span<const std::pair<Tokens, Tokens>> pairs, int max_n = 4);

struct PrecisionRecallF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

PrecisionRecallF rouge_n(TokenSpan candidate, TokenSpan reference, int n);
PrecisionRecallF rouge_l(TokenSpan candidate, TokenSpan reference);

std::size_t lcs_length(TokenSpan a, TokenSpan b);

/// Word-level Levenshtein distance, unit costs.
std::size_t edit_distance(TokenSpan candidate, TokenSpan reference);

/// edit_distance / |reference|. No block shifts.
double ter(TokenSpan candidate, TokenSpan reference);

/// max(0, 1 - ter): higher is better.
double ter_score(TokenSpan candidate, TokenSpan reference);

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

/// Exact-match unigram alignment with the most matches and, among those, the
/// fewest chunks. Exhaustive memoized search; falls back to a greedy
/// contiguous-first alignment if the search state space grows past a fixed
/// budget (only reachable with long runs of repeated tokens).
MeteorAlignment meteor_align(TokenSpan candidate, TokenSpan reference);

/// F_mean = 10PR / (R + 9P), scaled by 1 - 0.5 * (chunks / matches)^3.
double meteor_lite(TokenSpan candidate, TokenSpan reference);

struct SentenceScores {
  double bleu = 0;
  double rouge1_f = 0;
  double rouge2_f = 0;
  double rougeL_f = 0;
  double ter_score = 0;
  double meteor = 0;

  friend bool operator==(const SentenceScores&, const SentenceScores&) = default;
};

inline constexpr std::size_t kMetricCount = 6;

/// Field order used by every table and file: bleu, rouge1_f, rouge2_f,
/// rougeL_f, ter_score, meteor.
inline constexpr std::array<double SentenceScores::*, kMetricCount> kMetricFields = {
    &SentenceScores::bleu,     &SentenceScores::rouge1_f,  &SentenceScores::rouge2_f,
    &SentenceScores::rougeL_f, &SentenceScores::ter_score, &SentenceScores::meteor};
inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "bleu", "rouge1_f", "rouge2_f", "rougeL_f", "ter_score", "meteor"};
inline constexpr std::array<std::string_view, kMetricCount> kMetricLabels = {
    "BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "TER", "METEOR"};

/// Scores one candidate against one reference. An empty candidate scores 0 on
/// every field. When the reference has a single token, rouge2_f takes the
/// rouge1_f value since no bigram exists to compare.
SentenceScores score_pair(std::string_view candidate, std::string_view reference);

/// Field-wise arithmetic mean; all zeros for an empty input.
SentenceScores mean(std::span<const SentenceScores> scores);

}  // namespace nrt::metrics
