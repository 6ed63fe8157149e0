#include "nrt/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "nrt/csv.hpp"
#include "nrt/io.hpp"
#include "nrt/rng.hpp"
#include "nrt/text.hpp"

namespace nrt {

Corpus::Corpus(std::vector<PhrasePair> pairs, std::string origin)
    : pairs_(std::move(pairs)), origin_(std::move(origin)) {
  if (pairs_.empty()) throw CorpusError(origin_ + ": corpus is empty");
  std::unordered_set<std::size_t> seen;
  for (const auto& p : pairs_) {
    if (!seen.insert(p.id).second)
      throw CorpusError(origin_ + ": duplicate phrase id " + std::to_string(p.id));
    if (text::trim(p.source_text).empty() || text::trim(p.reference_translation).empty())
      throw CorpusError(origin_ + ": phrase " + std::to_string(p.id) + " has a blank field");
  }
}

const PhrasePair* Corpus::find(std::size_t id) const {
  auto it = std::find_if(pairs_.begin(), pairs_.end(), [id](const PhrasePair& p) { return p.id == id; });
  return it == pairs_.end() ? nullptr : &*it;
}

namespace {

std::size_t column_index(const csv::Row& header, const std::string& name, const std::string& origin) {
  for (std::size_t i = 0; i < header.cells.size(); ++i)
    if (text::trim(header.cells[i]) == name) return i;
  throw CorpusError(origin + ": missing required column '" + name + "'");
}

}  // namespace

LoadedCorpus parse_corpus(std::string_view csv_text, std::string origin, const ColumnNames& columns) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(csv_text);
  } catch (const csv::CsvError& e) {
    throw CorpusError(origin + ": " + e.what());
  }
  if (rows.empty()) throw CorpusError(origin + ": no header row");

  const csv::Row& header = rows.front();
  const std::size_t src_col = column_index(header, columns.source, origin);
  const std::size_t tgt_col = column_index(header, columns.target, origin);

  std::vector<PhrasePair> pairs;
  std::vector<std::string> warnings;
  std::unordered_map<std::string, std::size_t> first_line_of_source;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    const std::string where = origin + ": line " + std::to_string(row.line);
    if (row.cells.size() != header.cells.size())
      throw CorpusError(where + ": expected " + std::to_string(header.cells.size()) + " fields, found " +
                        std::to_string(row.cells.size()));
    std::string source{text::trim(row.cells[src_col])};
    std::string target{text::trim(row.cells[tgt_col])};
    if (source.empty()) throw CorpusError(where + ": empty '" + columns.source + "' cell");
    if (target.empty()) throw CorpusError(where + ": empty '" + columns.target + "' cell");
    if (source.find_first_of("\r\n") != std::string::npos || target.find_first_of("\r\n") != std::string::npos)
      throw CorpusError(where + ": phrase spans multiple lines");

    auto [it, inserted] = first_line_of_source.try_emplace(source, row.line);
    if (!inserted)
      warnings.push_back(where + ": duplicate source text '" + source + "' (first seen on line " +
                         std::to_string(it->second) + ")");
    pairs.push_back(PhrasePair{pairs.size(), std::move(source), std::move(target)});
  }
  if (pairs.empty()) throw CorpusError(origin + ": no data rows");
  return LoadedCorpus{Corpus(std::move(pairs), std::move(origin)), std::move(warnings)};
}

LoadedCorpus load_corpus(const std::filesystem::path& path, const ColumnNames& columns) {
  std::string content;
  try {
    content = io::read_file(path);
  } catch (const IoError& e) {
    throw CorpusError(e.what());
  }
  return parse_corpus(content, path.string(), columns);
}

std::string to_csv(const Corpus& corpus, const ColumnNames& columns) {
  std::string out = csv::format_row(std::vector<std::string>{columns.source, columns.target});
  for (const auto& p : corpus.pairs())
    out += csv::format_row(std::vector<std::string>{p.source_text, p.reference_translation});
  return out;
}

Corpus sample_subset(const Corpus& corpus, const SubsetSpec& spec) {
  const std::size_t n = corpus.size();
  if (spec.size < 2 || spec.size > n)
    throw CorpusError("subset size " + std::to_string(spec.size) + " out of range [2, " + std::to_string(n) + "]");

  SplitMix64 rng(spec.seed ^ (static_cast<std::uint64_t>(spec.size) * 0x9E3779B97F4A7C15ULL));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < spec.size; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(spec.size);
  std::sort(idx.begin(), idx.end());

  std::vector<PhrasePair> chosen;
  chosen.reserve(spec.size);
  for (std::size_t i : idx) chosen.push_back(corpus.pairs()[i]);
  return Corpus(std::move(chosen), corpus.origin());
}

LeaveOneOutSplit leave_one_out(const Corpus& subset, std::size_t target_id) {
  if (subset.size() < 2) throw CorpusError("leave-one-out needs at least 2 pairs");
  const PhrasePair* target = subset.find(target_id);
  if (!target) throw CorpusError("phrase id " + std::to_string(target_id) + " is not in the subset");

  LeaveOneOutSplit split{*target, {}};
  split.context.reserve(subset.size() - 1);
  for (const auto& p : subset.pairs())
    if (p.id != target_id) split.context.push_back(p);
  return split;
}

std::vector<std::size_t> duplicate_sources(const Corpus& corpus) {
  std::set<std::string_view> seen;
  std::vector<std::size_t> dups;
  for (const auto& p : corpus.pairs())
    if (!seen.insert(p.source_text).second) dups.push_back(p.id);
  return dups;
}

}  // namespace nrt
