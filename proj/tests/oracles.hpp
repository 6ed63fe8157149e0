#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library's metric routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace nrt::oracle {

using Seq = std::vector<std::string>;

namespace detail {

// Each candidate position is either left out (a deletion) or aligned to a
// later reference position, skipping the reference words in between
// (insertions); an aligned pair costs 1 if the words differ. Every monotone
// alignment, i.e. every edit script without redundant steps, is visited.
inline void enumerate_scripts(const Seq& c, const Seq& r, std::size_t i, std::size_t j, std::size_t cost,
                              std::size_t& best) {
  if (cost >= best) return;
  if (i == c.size()) {
    best = std::min(best, cost + (r.size() - j));
    return;
  }
  enumerate_scripts(c, r, i + 1, j, cost + 1, best);
  for (std::size_t k = j; k < r.size(); ++k)
    enumerate_scripts(c, r, i + 1, k + 1, cost + (k - j) + (c[i] == r[k] ? 0 : 1), best);
}

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

inline void enumerate_matchings(const Seq& c, const Seq& r, std::size_t i, std::vector<bool>& used,
                                std::vector<std::pair<std::size_t, std::size_t>>& pairs, Alignment& best,
                                bool& any) {
  if (i == c.size()) {
    Alignment a;
    a.matches = pairs.size();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const bool continues = k > 0 && pairs[k].first == pairs[k - 1].first + 1 && pairs[k].second == pairs[k - 1].second + 1;
      if (!continues) ++a.chunks;
    }
    if (!any || a.matches > best.matches || (a.matches == best.matches && a.chunks < best.chunks)) best = a;
    any = true;
    return;
  }
  enumerate_matchings(c, r, i + 1, used, pairs, best, any);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (used[j] || r[j] != c[i]) continue;
    used[j] = true;
    pairs.emplace_back(i, j);
    enumerate_matchings(c, r, i + 1, used, pairs, best, any);
    pairs.pop_back();
    used[j] = false;
  }
}

}  // namespace detail

/// Minimum edit-script cost by exhaustive search (branch and bound).
inline std::size_t edit_distance(const Seq& c, const Seq& r) {
  std::size_t best = c.size() + r.size();
  detail::enumerate_scripts(c, r, 0, 0, 0, best);
  return best;
}

/// Most matches, then fewest chunks, over every exact-match partial matching.
inline detail::Alignment meteor_alignment(const Seq& c, const Seq& r) {
  detail::Alignment best;
  bool any = false;
  std::vector<bool> used(r.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  detail::enumerate_matchings(c, r, 0, used, pairs, best, any);
  return best;
}

inline std::size_t count_ngram(const Seq& s, const Seq& s_src, std::size_t start, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    bool eq = true;
    for (std::size_t k = 0; k < n && eq; ++k) eq = s[i + k] == s_src[start + k];
    count += eq;
  }
  return count;
}

/// Clipped n-gram matches by linear scans: each distinct candidate n-gram is
/// counted at its first occurrence.
inline std::size_t clipped_matches(const Seq& c, const Seq& r, std::size_t n) {
  std::size_t total = 0;
  for (std::size_t i = 0; i + n <= c.size(); ++i) {
    bool first = true;
    for (std::size_t p = 0; p < i && first; ++p) {
      bool eq = true;
      for (std::size_t k = 0; k < n && eq; ++k) eq = c[p + k] == c[i + k];
      if (eq) first = false;
    }
    if (!first) continue;
    total += std::min(count_ngram(c, c, i, n), count_ngram(r, c, i, n));
  }
  return total;
}

/// Smoothed sentence BLEU written out directly from its definition.
inline double bleu(const Seq& c, const Seq& r, double epsilon = 0.1, std::size_t max_n = 4) {
  if (c.empty() || clipped_matches(c, r, 1) == 0) return 0.0;
  double product = 1.0;
  std::size_t orders = 0;
  for (std::size_t n = 1; n <= max_n && n <= c.size(); ++n) {
    const double total = static_cast<double>(c.size() - n + 1);
    const std::size_t m = clipped_matches(c, r, n);
    product *= m > 0 ? m / total : epsilon / total;
    ++orders;
  }
  const double bp = c.size() < r.size() ? std::exp(1.0 - double(r.size()) / double(c.size())) : 1.0;
  return std::pow(product, 1.0 / double(orders)) * bp;
}

/// LCS length by trying every subsequence of `a` (|a| <= ~16).
inline std::size_t lcs_length(const Seq& a, const Seq& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t len = static_cast<std::size_t>(__builtin_popcount(mask));
    if (len <= best) continue;
    std::size_t j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false;
      else ++j;
    }
    if (ok) best = len;
  }
  return best;
}

/// Calls f(seq) for every sequence over `alphabet` of length 0..max_len.
template <class F>
void for_each_sequence(const std::vector<std::string>& alphabet, std::size_t max_len, F&& f) {
  Seq seq;
  for (std::size_t len = 0; len <= max_len; ++len) {
    std::vector<std::size_t> digits(len, 0);
    for (;;) {
      seq.clear();
      for (std::size_t d : digits) seq.push_back(alphabet[d]);
      f(seq);
      std::size_t k = 0;
      while (k < len && ++digits[k] == alphabet.size()) digits[k++] = 0;
      if (k == len) break;
    }
  }
}

}  // namespace nrt::oracle
