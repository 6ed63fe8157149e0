#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrt/backend.hpp"
#include "nrt/corpus.hpp"
#include "nrt/metrics.hpp"
#include "nrt/prompting.hpp"

namespace nrt {

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  ColumnNames columns;
  std::vector<std::size_t> sizes{10, 50, 100};
  std::uint64_t seed = 0;
  std::vector<PromptStyle> styles{PromptStyle::ChainOfReasoning, PromptStyle::Direct};
  BackendConfig backend;
  std::size_t max_in_flight = 4;
  std::optional<std::filesystem::path> cache_dir;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> prompt_dir;
};

struct RunRecord {
  std::size_t phrase_id = 0;
  PromptStyle style = PromptStyle::Direct;
  std::size_t subset_size = 0;
  std::size_t context_size = 0;
  std::string source_text;
  std::string reference;
  std::string candidate;
  metrics::SentenceScores scores;
  double latency_seconds = 0;
  bool from_cache = false;
  bool failed = false;
  std::string error;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

struct GroupKey {
  PromptStyle style = PromptStyle::Direct;
  std::size_t subset_size = 0;

  auto operator<=>(const GroupKey&) const = default;
};

struct Aggregate {
  metrics::SentenceScores mean;
  std::size_t scored = 0;
  std::size_t failed = 0;
  double corpus_bleu = 0;

  friend bool operator==(const Aggregate&, const Aggregate&) = default;
};

using Aggregates = std::map<GroupKey, Aggregate>;

struct ExperimentResult {
  nlohmann::json config_echo;
  std::string metrics_version;
  std::vector<RunRecord> records;
  Aggregates aggregates;
  /// Wall-clock facts (timestamps, durations) kept apart so the rest of the
  /// result is reproducible byte for byte.
  nlohmann::json run_metadata = nlohmann::json::object();
  /// Parallel to `records`; empty when the result was read back from disk.
  std::vector<RenderedPrompt> prompts;

  std::size_t failed_count() const;
};

/// Means over non-failed records per (style, subset size). Groups with no
/// scored record are omitted.
Aggregates aggregate(std::span<const RunRecord> records);

/// What run_experiment calls for every prompt. Must be safe to call from
/// several threads at once.
using TranslateFn = std::function<TranslationResponse(const RenderedPrompt&, const PhrasePair& target)>;

/// Loads the corpus, validates `config`, and translates through a Translator
/// built from `config.backend`. Does not write files.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Same workflow with the translation step supplied by the caller.
ExperimentResult run_experiment(const ExperimentConfig& config, const TranslateFn& translate);

/// Throws ConfigError for empty styles/sizes, sizes outside [2, corpus_size],
/// repeated sizes, or max_in_flight == 0.
void validate_config(const ExperimentConfig& config, std::size_t corpus_size);

/// Config as recorded in config.json. Never contains the API key itself.
nlohmann::json config_to_json(const ExperimentConfig& config);

nlohmann::json result_to_json(const ExperimentResult& result);
ExperimentResult result_from_json(const nlohmann::json& doc);

std::string records_csv(std::span<const RunRecord> records);
std::string aggregates_csv(const Aggregates& aggregates);

/// Writes records.csv, records.json, aggregates.csv, config.json and, when
/// prompts are present, prompts.jsonl.
void write_result(const ExperimentResult& result, const std::filesystem::path& dir);

/// Reads `<dir>/records.json`. Throws IoError naming the file on failure.
ExperimentResult read_result(const std::filesystem::path& dir);

/// Shortest decimal string that reads back as the same double.
std::string format_number(double value);

}  // namespace nrt
