#include "nrt/metrics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <unordered_map>

#include "nrt/text.hpp"

namespace nrt::metrics {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

// Common typographic punctuation in UTF-8: curly quotes, dashes, ellipsis.
constexpr std::array<std::string_view, 7> kUnicodePunct = {
    "‘", "’", "“", "”", "–", "—", "…"};

std::string_view strip_punct(std::string_view s) {
  for (bool changed = true; changed && !s.empty();) {
    changed = false;
    if (is_ascii_punct(static_cast<unsigned char>(s.front()))) {
      s.remove_prefix(1);
      changed = true;
    } else if (is_ascii_punct(static_cast<unsigned char>(s.back()))) {
      s.remove_suffix(1);
      changed = true;
    } else {
      for (auto p : kUnicodePunct) {
        if (s.starts_with(p)) {
          s.remove_prefix(p.size());
          changed = true;
        } else if (s.ends_with(p)) {
          s.remove_suffix(p.size());
          changed = true;
        }
        if (changed) break;
      }
    }
  }
  return s;
}

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts ngram_counts(TokenSpan tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> key(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++counts[std::move(key)];
  }
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

PrecisionRecallF make_prf(double overlap, double cand_total, double ref_total) {
  PrecisionRecallF r;
  r.precision = cand_total > 0 ? overlap / cand_total : 0.0;
  r.recall = ref_total > 0 ? overlap / ref_total : 0.0;
  r.f1 = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// Shared by sentence and corpus BLEU: matches[n-1] / totals[n-1] per order.
double bleu_from_counts(std::span<const std::size_t> matches, std::span<const std::size_t> totals,
                        std::size_t cand_len, std::size_t ref_len) {
  if (cand_len == 0 || matches.empty() || matches[0] == 0) return 0.0;
  double log_sum = 0;
  std::size_t orders = 0;
  for (std::size_t k = 0; k < matches.size(); ++k) {
    if (totals[k] == 0) break;
    const double total = static_cast<double>(totals[k]);
    const double p = matches[k] > 0 ? static_cast<double>(matches[k]) / total : kBleuEpsilon / total;
    log_sum += std::log(p);
    ++orders;
  }
  const double geo = std::exp(log_sum / static_cast<double>(orders));
  const double bp = cand_len < ref_len
                        ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                        : 1.0;
  return geo * bp;
}

}  // namespace

Tokens tokenize(std::string_view input) {
  Tokens out;
  const std::string lowered = text::to_lower(input);
  for (std::string_view word : text::split_whitespace(lowered)) {
    std::size_t start = 0;
    while (start <= word.size()) {
      std::size_t slash = word.find('/', start);
      if (slash == std::string_view::npos) slash = word.size();
      std::string_view piece = strip_punct(word.substr(start, slash - start));
      if (!piece.empty()) out.emplace_back(piece);
      start = slash + 1;
    }
  }
  return out;
}

double bleu_sentence(TokenSpan candidate, TokenSpan reference, int max_n) {
  if (reference.empty()) throw MetricError("bleu: empty reference");
  if (max_n < 1) throw MetricError("bleu: max_n must be positive");
  const std::size_t orders = std::min<std::size_t>(static_cast<std::size_t>(max_n), candidate.size());
  std::vector<std::size_t> matches(orders), totals(orders);
  for (std::size_t n = 1; n <= orders; ++n) {
    const NgramCounts c = ngram_counts(candidate, n);
    matches[n - 1] = clipped_overlap(c, ngram_counts(reference, n));
    totals[n - 1] = candidate.size() - n + 1;
  }
  return bleu_from_counts(matches, totals, candidate.size(), reference.size());
}

double bleu_corpus(std::span<const std::pair<Tokens, Tokens>> pairs, int max_n) {
  if (max_n < 1) throw MetricError("bleu: max_n must be positive");
  const auto orders = static_cast<std::size_t>(max_n);
  std::vector<std::size_t> matches(orders, 0), totals(orders, 0);
  std::size_t cand_len = 0, ref_len = 0;
  for (const auto& [cand, ref] : pairs) {
    if (ref.empty()) throw MetricError("bleu: empty reference");
    cand_len += cand.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= orders && n <= cand.size(); ++n) {
      matches[n - 1] += clipped_overlap(ngram_counts(cand, n), ngram_counts(ref, n));
      totals[n - 1] += cand.size() - n + 1;
    }
  }
  return bleu_from_counts(matches, totals, cand_len, ref_len);
}

PrecisionRecallF rouge_n(TokenSpan candidate, TokenSpan reference, int n) {
  if (n < 1) throw MetricError("rouge-n: n must be positive");
  const auto un = static_cast<std::size_t>(n);
  if (reference.size() < un) throw MetricError("rouge-n: reference shorter than n");
  const std::size_t overlap = clipped_overlap(ngram_counts(candidate, un), ngram_counts(reference, un));
  const std::size_t cand_total = candidate.size() >= un ? candidate.size() - un + 1 : 0;
  return make_prf(static_cast<double>(overlap), static_cast<double>(cand_total),
                  static_cast<double>(reference.size() - un + 1));
}

std::size_t lcs_length(TokenSpan a, TokenSpan b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

PrecisionRecallF rouge_l(TokenSpan candidate, TokenSpan reference) {
  if (candidate.empty() || reference.empty()) throw MetricError("rouge-l: empty input");
  return make_prf(static_cast<double>(lcs_length(candidate, reference)), static_cast<double>(candidate.size()),
                  static_cast<double>(reference.size()));
}

std::size_t edit_distance(TokenSpan candidate, TokenSpan reference) {
  std::vector<std::size_t> prev(reference.size() + 1), cur(reference.size() + 1);
  for (std::size_t j = 0; j <= reference.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= candidate.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= reference.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (candidate[i - 1] == reference[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[reference.size()];
}

double ter(TokenSpan candidate, TokenSpan reference) {
  if (reference.empty()) throw MetricError("ter: empty reference");
  return static_cast<double>(edit_distance(candidate, reference)) / static_cast<double>(reference.size());
}

double ter_score(TokenSpan candidate, TokenSpan reference) {
  return std::max(0.0, 1.0 - ter(candidate, reference));
}

namespace {

class AlignmentSearch {
 public:
  static constexpr std::size_t kStateBudget = 1u << 20;

  AlignmentSearch(TokenSpan cand, TokenSpan ref) : cand_(cand), none_(static_cast<std::uint32_t>(ref.size())) {
    // Only reference positions whose token occurs in the candidate take part.
    std::vector<int> bit_of(ref.size(), -1);
    options_.resize(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (cand[i] != ref[j]) continue;
        if (bit_of[j] < 0) bit_of[j] = static_cast<int>(bits_++);
        if (bits_ > 64) {
          feasible_ = false;
          return;
        }
        options_[i].push_back({static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(bit_of[j])});
      }
    }

    // A maximum alignment matches exactly min(candidate count, reference
    // count) tokens of each word, so each word has a fixed skip allowance.
    std::unordered_map<std::string_view, std::size_t> type_of;
    type_.resize(cand.size());
    seen_before_.resize(cand.size());
    for (std::size_t i = 0; i < cand.size(); ++i) {
      auto [it, fresh] = type_of.try_emplace(cand[i], type_of.size());
      type_[i] = it->second;
      if (fresh) {
        skip_allowance_.push_back(0);
        type_mask_.push_back(0);
      }
      seen_before_[i] = skip_allowance_[type_[i]]++;
    }
    std::vector<std::size_t> ref_count(skip_allowance_.size(), 0);
    for (std::size_t j = 0; j < ref.size(); ++j) {
      auto it = type_of.find(ref[j]);
      if (it == type_of.end()) continue;
      ++ref_count[it->second];
      type_mask_[it->second] |= std::uint64_t{1} << bit_of[j];
    }
    for (std::size_t t = 0; t < skip_allowance_.size(); ++t)
      skip_allowance_[t] -= std::min(skip_allowance_[t], ref_count[t]);
  }

  bool feasible() const { return feasible_; }
  bool exhausted() const { return exhausted_; }

  MeteorAlignment solve() { return solve(0, 0, none_); }

 private:
  struct Option {
    std::uint32_t ref_pos;
    std::uint32_t bit;
  };
  struct Key {
    std::uint64_t mask;
    std::uint32_t i;
    std::uint32_t prev;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.mask * 0x9E3779B97F4A7C15ULL;
      h ^= (static_cast<std::uint64_t>(k.i) << 32 | k.prev) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  static bool better(const MeteorAlignment& a, const MeteorAlignment& b) {
    return a.matches > b.matches || (a.matches == b.matches && a.chunks < b.chunks);
  }

  MeteorAlignment solve(std::uint32_t i, std::uint64_t mask, std::uint32_t prev) {
    if (i == cand_.size() || exhausted_) return {};
    const Key key{mask, i, prev};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    const std::size_t t = type_[i];
    const std::size_t skipped = seen_before_[i] - static_cast<std::size_t>(std::popcount(mask & type_mask_[t]));
    std::optional<MeteorAlignment> best;
    if (skipped < skip_allowance_[t]) best = solve(i + 1, mask, none_);
    for (const Option& opt : options_[i]) {
      const std::uint64_t bit = std::uint64_t{1} << opt.bit;
      if (mask & bit) continue;
      MeteorAlignment sub = solve(i + 1, mask | bit, opt.ref_pos);
      sub.matches += 1;
      if (!(prev != none_ && opt.ref_pos == prev + 1)) sub.chunks += 1;
      if (!best || better(sub, *best)) best = sub;
    }
    if (!best) best = solve(i + 1, mask, none_);  // unreachable for consistent counts
    if (memo_.size() >= kStateBudget) exhausted_ = true;
    memo_.emplace(key, *best);
    return *best;
  }

  TokenSpan cand_;
  std::uint32_t none_;
  std::vector<std::vector<Option>> options_;
  std::vector<std::size_t> type_;
  std::vector<std::size_t> seen_before_;
  std::vector<std::size_t> skip_allowance_;
  std::vector<std::uint64_t> type_mask_;
  std::size_t bits_ = 0;
  bool feasible_ = true;
  bool exhausted_ = false;
  std::unordered_map<Key, MeteorAlignment, KeyHash> memo_;
};

MeteorAlignment greedy_align(TokenSpan cand, TokenSpan ref) {
  std::vector<bool> used(ref.size(), false);
  MeteorAlignment a;
  std::size_t prev = ref.size();  // none
  for (std::size_t i = 0; i < cand.size(); ++i) {
    std::size_t pick = ref.size();
    if (prev + 1 < ref.size() && !used[prev + 1] && ref[prev + 1] == cand[i]) {
      pick = prev + 1;
    } else {
      for (std::size_t j = 0; j < ref.size(); ++j)
        if (!used[j] && ref[j] == cand[i]) {
          pick = j;
          break;
        }
    }
    if (pick == ref.size()) {
      prev = ref.size();
      continue;
    }
    if (!(prev < ref.size() && pick == prev + 1)) ++a.chunks;
    used[pick] = true;
    ++a.matches;
    prev = pick;
  }
  return a;
}

}  // namespace

MeteorAlignment meteor_align(TokenSpan candidate, TokenSpan reference) {
  AlignmentSearch search(candidate, reference);
  if (search.feasible()) {
    MeteorAlignment a = search.solve();
    if (!search.exhausted()) return a;
  }
  return greedy_align(candidate, reference);
}

double meteor_lite(TokenSpan candidate, TokenSpan reference) {
  if (candidate.empty() || reference.empty()) throw MetricError("meteor: empty input");
  const MeteorAlignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double f_mean = 10 * p * r / (r + 9 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  return f_mean * (1.0 - 0.5 * frag * frag * frag);
}

SentenceScores score_pair(std::string_view candidate, std::string_view reference) {
  const Tokens ref = tokenize(reference);
  if (ref.empty()) throw MetricError("reference has no tokens: '" + std::string(reference) + "'");
  const Tokens cand = tokenize(candidate);
  SentenceScores s;
  if (cand.empty()) return s;
  s.bleu = bleu_sentence(cand, ref);
  s.rouge1_f = rouge_n(cand, ref, 1).f1;
  s.rouge2_f = ref.size() >= 2 ? rouge_n(cand, ref, 2).f1 : s.rouge1_f;
  s.rougeL_f = rouge_l(cand, ref).f1;
  s.ter_score = ter_score(cand, ref);
  s.meteor = meteor_lite(cand, ref);
  return s;
}

SentenceScores mean(std::span<const SentenceScores> scores) {
  SentenceScores out;
  if (scores.empty()) return out;
  for (const auto& s : scores)
    for (auto field : kMetricFields) out.*field += s.*field;
  for (auto field : kMetricFields) out.*field /= static_cast<double>(scores.size());
  return out;
}

}  // namespace nrt::metrics
