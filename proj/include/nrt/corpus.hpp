#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nrt/error.hpp"

namespace nrt {

class CorpusError : public Error {
 public:
  using Error::Error;
};

struct PhrasePair {
  std::size_t id = 0;
  std::string source_text;
  std::string reference_translation;

  friend bool operator==(const PhrasePair&, const PhrasePair&) = default;
};

/// Ordered, non-empty collection of phrase pairs with distinct ids.
/// Immutable once constructed.
class Corpus {
 public:
  /// Throws CorpusError if `pairs` is empty, ids repeat, or a text field is
  /// blank.
  Corpus(std::vector<PhrasePair> pairs, std::string origin);

  const std::vector<PhrasePair>& pairs() const { return pairs_; }
  const std::string& origin() const { return origin_; }
  std::size_t size() const { return pairs_.size(); }

  /// nullptr when `id` is absent.
  const PhrasePair* find(std::size_t id) const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<PhrasePair> pairs_;
  std::string origin_;
};

struct ColumnNames {
  std::string source = "source";
  std::string target = "translation";
};

struct LoadedCorpus {
  Corpus corpus;
  std::vector<std::string> warnings;
};

LoadedCorpus parse_corpus(std::string_view csv_text, std::string origin,
                          const ColumnNames& columns = {});

LoadedCorpus load_corpus(const std::filesystem::path& path, const ColumnNames& columns = {});

/// Serializes with the given header names; `parse_corpus` reads it back.
std::string to_csv(const Corpus& corpus, const ColumnNames& columns = {});

struct SubsetSpec {
  std::size_t size = 0;
  std::uint64_t seed = 0;
};

/// Draws `spec.size` pairs uniformly without replacement. The generator is
/// SplitMix64 seeded with `seed ^ (size * 0x9E3779B97F4A7C15)`, driving a
/// partial Fisher-Yates shuffle of the index range; chosen indices are then
/// emitted in corpus order.
Corpus sample_subset(const Corpus& corpus, const SubsetSpec& spec);

struct LeaveOneOutSplit {
  PhrasePair target;
  std::vector<PhrasePair> context;
};

LeaveOneOutSplit leave_one_out(const Corpus& subset, std::size_t target_id);

/// Ids of pairs whose source text repeats an earlier pair's source text.
std::vector<std::size_t> duplicate_sources(const Corpus& corpus);

}  // namespace nrt
