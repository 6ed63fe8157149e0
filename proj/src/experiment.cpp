#include "nrt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "nrt/csv.hpp"
#include "nrt/io.hpp"

namespace nrt {

using nlohmann::json;

std::string format_number(double value) { return fmt::format("{}", value); }

std::size_t ExperimentResult::failed_count() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const RunRecord& r) { return r.failed; }));
}

Aggregates aggregate(std::span<const RunRecord> records) {
  struct Bucket {
    std::vector<metrics::SentenceScores> scores;
    std::vector<std::pair<metrics::Tokens, metrics::Tokens>> token_pairs;
    std::size_t failed = 0;
  };
  std::map<GroupKey, Bucket> buckets;
  for (const auto& r : records) {
    Bucket& b = buckets[GroupKey{r.style, r.subset_size}];
    if (r.failed) {
      ++b.failed;
      continue;
    }
    b.scores.push_back(r.scores);
    b.token_pairs.emplace_back(metrics::tokenize(r.candidate), metrics::tokenize(r.reference));
  }
  Aggregates out;
  for (auto& [key, b] : buckets) {
    if (b.scores.empty()) continue;
    out.emplace(key, Aggregate{metrics::mean(b.scores), b.scores.size(), b.failed, metrics::bleu_corpus(b.token_pairs)});
  }
  return out;
}

void validate_config(const ExperimentConfig& config, std::size_t corpus_size) {
  if (config.styles.empty()) throw ConfigError("no prompt styles selected");
  if (config.sizes.empty()) throw ConfigError("no subset sizes given");
  if (config.max_in_flight == 0) throw ConfigError("max_in_flight must be at least 1");
  std::set<std::size_t> seen;
  for (std::size_t size : config.sizes) {
    if (size < 2 || size > corpus_size)
      throw ConfigError("subset size " + std::to_string(size) + " outside [2, " + std::to_string(corpus_size) + "]");
    if (!seen.insert(size).second) throw ConfigError("subset size " + std::to_string(size) + " given twice");
  }
  if (std::set<PromptStyle>(config.styles.begin(), config.styles.end()).size() != config.styles.size())
    throw ConfigError("prompt style given twice");
  config.backend.validate();
}

json config_to_json(const ExperimentConfig& config) {
  json styles = json::array();
  for (auto s : config.styles) styles.push_back(style_name(s));
  const BackendConfig& b = config.backend;
  json backend = {
      {"kind", backend_name(b.kind)},
      {"endpoint_url", b.endpoint_url},
      {"model_name", b.model_name},
      {"api_key_env", b.api_key_env},
      {"api_key", "[redacted]"},
      {"timeout_seconds", b.timeout.count()},
      {"max_retries", b.max_retries},
      {"temperature", b.temperature},
      {"backoff_initial_ms", b.backoff_initial.count()},
      {"backoff_max_ms", b.backoff_max.count()},
  };
  auto opt_path = [](const std::optional<std::filesystem::path>& p) -> json {
    return p ? json(p->generic_string()) : json(nullptr);
  };
  return {
      {"corpus_path", config.corpus_path.generic_string()},
      {"source_column", config.columns.source},
      {"target_column", config.columns.target},
      {"sizes", config.sizes},
      {"seed", config.seed},
      {"styles", styles},
      {"backend", backend},
      {"max_in_flight", config.max_in_flight},
      {"cache_dir", opt_path(config.cache_dir)},
      {"prompt_dir", opt_path(config.prompt_dir)},
  };
}

namespace {

struct Task {
  RunRecord record;
  RenderedPrompt prompt;
  PhrasePair target;
  std::optional<TranslationResponse> response;
};

std::string utc_now() { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()))); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  Translator translator(config.backend, TranslatorOptions{config.max_in_flight, config.cache_dir});
  return run_experiment(config, [&translator](const RenderedPrompt& prompt, const PhrasePair& target) {
    return translator.translate(prompt, target.reference_translation);
  });
}

ExperimentResult run_experiment(const ExperimentConfig& config, const TranslateFn& translate) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  const LoadedCorpus loaded = load_corpus(config.corpus_path, config.columns);
  const Corpus& corpus = loaded.corpus;
  validate_config(config, corpus.size());
  const PromptTemplates templates =
      config.prompt_dir ? PromptTemplates::load_dir(*config.prompt_dir) : PromptTemplates::builtin();

  std::vector<std::size_t> sizes = config.sizes;
  std::sort(sizes.begin(), sizes.end());

  std::vector<Task> tasks;
  for (PromptStyle style : config.styles) {
    for (std::size_t size : sizes) {
      const Corpus subset = sample_subset(corpus, SubsetSpec{size, config.seed});
      for (const PhrasePair& pair : subset.pairs()) {
        LeaveOneOutSplit split = leave_one_out(subset, pair.id);
        Task task;
        task.record.phrase_id = pair.id;
        task.record.style = style;
        task.record.subset_size = size;
        task.record.context_size = split.context.size();
        task.record.source_text = pair.source_text;
        task.record.reference = pair.reference_translation;
        task.target = pair;
        try {
          task.prompt = build_prompt(style, split, templates);
        } catch (const PromptError& e) {
          task.record.failed = true;
          task.record.error = e.what();
        }
        tasks.push_back(std::move(task));
      }
    }
  }

  // Each worker writes only its own task slot, so arrival order cannot affect
  // what ends up in the records.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      Task& task = tasks[i];
      if (task.record.failed) continue;
      try {
        task.response = translate(task.prompt, task.target);
      } catch (const std::exception& e) {
        task.record.failed = true;
        task.record.error = e.what();
      }
    }
  };
  {
    const std::size_t n_workers = std::min(config.max_in_flight, std::max<std::size_t>(tasks.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }

  ExperimentResult result;
  result.metrics_version = std::string(metrics::kMetricsVersion);
  result.config_echo = config_to_json(config);
  for (PromptStyle style : config.styles)
    result.config_echo["template_sha256"][std::string(style_name(style))] = templates.fingerprint(style);
  result.records.reserve(tasks.size());
  result.prompts.reserve(tasks.size());
  for (Task& task : tasks) {
    RunRecord& r = task.record;
    if (!r.failed && task.response) {
      r.candidate = task.response->candidate;
      r.latency_seconds = task.response->latency.count();
      r.from_cache = task.response->from_cache;
      try {
        r.scores = metrics::score_pair(r.candidate, r.reference);
      } catch (const metrics::MetricError& e) {
        r.failed = true;
        r.error = e.what();
      }
    }
    result.records.push_back(std::move(r));
    result.prompts.push_back(std::move(task.prompt));
  }
  result.aggregates = aggregate(result.records);
  result.run_metadata = {
      {"started_at", started_at},
      {"finished_at", utc_now()},
      {"wall_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()},
      {"records", result.records.size()},
      {"failed", result.failed_count()},
      {"corpus_warnings", loaded.warnings},
  };
  return result;
}

namespace {

json scores_to_json(const metrics::SentenceScores& s) {
  json out = json::object();
  for (std::size_t k = 0; k < metrics::kMetricCount; ++k) out[std::string(metrics::kMetricNames[k])] = s.*metrics::kMetricFields[k];
  return out;
}

metrics::SentenceScores scores_from_json(const json& j) {
  metrics::SentenceScores s;
  for (std::size_t k = 0; k < metrics::kMetricCount; ++k) s.*metrics::kMetricFields[k] = j.at(std::string(metrics::kMetricNames[k])).get<double>();
  return s;
}

}  // namespace

json result_to_json(const ExperimentResult& result) {
  json records = json::array();
  for (const auto& r : result.records) {
    records.push_back({
        {"phrase_id", r.phrase_id},
        {"style", style_name(r.style)},
        {"subset_size", r.subset_size},
        {"context_size", r.context_size},
        {"source", r.source_text},
        {"reference", r.reference},
        {"candidate", r.candidate},
        {"scores", scores_to_json(r.scores)},
        {"latency_seconds", r.latency_seconds},
        {"from_cache", r.from_cache},
        {"status", r.failed ? "failed" : "ok"},
        {"error", r.error},
    });
  }
  json aggregates = json::array();
  for (const auto& [key, agg] : result.aggregates) {
    aggregates.push_back({
        {"style", style_name(key.style)},
        {"subset_size", key.subset_size},
        {"scored", agg.scored},
        {"failed", agg.failed},
        {"corpus_bleu", agg.corpus_bleu},
        {"mean", scores_to_json(agg.mean)},
    });
  }
  return {
      {"metrics_version", result.metrics_version},
      {"config", result.config_echo},
      {"records", records},
      {"aggregates", aggregates},
      {"run_metadata", result.run_metadata},
  };
}

ExperimentResult result_from_json(const json& doc) {
  ExperimentResult result;
  result.metrics_version = doc.at("metrics_version").get<std::string>();
  result.config_echo = doc.at("config");
  result.run_metadata = doc.value("run_metadata", json::object());
  for (const json& j : doc.at("records")) {
    RunRecord r;
    r.phrase_id = j.at("phrase_id").get<std::size_t>();
    r.style = parse_style(j.at("style").get<std::string>());
    r.subset_size = j.at("subset_size").get<std::size_t>();
    r.context_size = j.at("context_size").get<std::size_t>();
    r.source_text = j.at("source").get<std::string>();
    r.reference = j.at("reference").get<std::string>();
    r.candidate = j.at("candidate").get<std::string>();
    r.scores = scores_from_json(j.at("scores"));
    r.latency_seconds = j.at("latency_seconds").get<double>();
    r.from_cache = j.at("from_cache").get<bool>();
    const std::string status = j.at("status").get<std::string>();
    if (status != "ok" && status != "failed") throw Error("unknown record status '" + status + "'");
    r.failed = status == "failed";
    r.error = j.at("error").get<std::string>();
    result.records.push_back(std::move(r));
  }
  result.aggregates = aggregate(result.records);

  Aggregates stored;
  for (const json& j : doc.at("aggregates")) {
    GroupKey key{parse_style(j.at("style").get<std::string>()), j.at("subset_size").get<std::size_t>()};
    stored.emplace(key, Aggregate{scores_from_json(j.at("mean")), j.at("scored").get<std::size_t>(),
                                  j.at("failed").get<std::size_t>(), j.at("corpus_bleu").get<double>()});
  }
  if (stored != result.aggregates) throw Error("stored aggregates do not match the stored records");
  return result;
}

std::string records_csv(std::span<const RunRecord> records) {
  std::vector<std::string> header{"phrase_id", "style", "subset_size", "context_size", "source", "reference", "candidate"};
  for (auto name : metrics::kMetricNames) header.emplace_back(name);
  for (const char* h : {"latency_seconds", "from_cache", "status", "error"}) header.emplace_back(h);
  std::string out = csv::format_row(header);
  for (const auto& r : records) {
    std::vector<std::string> row{std::to_string(r.phrase_id), std::string(style_name(r.style)),
                                 std::to_string(r.subset_size), std::to_string(r.context_size),
                                 r.source_text, r.reference, r.candidate};
    for (auto field : metrics::kMetricFields) row.push_back(format_number(r.scores.*field));
    row.push_back(format_number(r.latency_seconds));
    row.emplace_back(r.from_cache ? "true" : "false");
    row.emplace_back(r.failed ? "failed" : "ok");
    row.push_back(r.error);
    out += csv::format_row(row);
  }
  return out;
}

std::string aggregates_csv(const Aggregates& aggregates) {
  std::vector<std::string> header{"style", "subset_size"};
  for (auto name : metrics::kMetricNames) header.emplace_back(name);
  std::string out = csv::format_row(header);
  for (const auto& [key, agg] : aggregates) {
    std::vector<std::string> row{std::string(style_name(key.style)), std::to_string(key.subset_size)};
    for (auto field : metrics::kMetricFields) row.push_back(format_number(agg.mean.*field));
    out += csv::format_row(row);
  }
  return out;
}

void write_result(const ExperimentResult& result, const std::filesystem::path& dir) {
  io::write_file_atomic(dir / "records.csv", records_csv(result.records));
  io::write_file_atomic(dir / "aggregates.csv", aggregates_csv(result.aggregates));
  io::write_file_atomic(dir / "records.json", result_to_json(result).dump(2) + "\n");
  io::write_file_atomic(dir / "config.json", result.config_echo.dump(2) + "\n");
  if (!result.prompts.empty()) {
    std::string lines;
    for (std::size_t i = 0; i < result.prompts.size() && i < result.records.size(); ++i) {
      const RenderedPrompt& p = result.prompts[i];
      if (p.system_message.empty()) continue;
      const RunRecord& r = result.records[i];
      lines += json{{"phrase_id", r.phrase_id},
                    {"style", style_name(r.style)},
                    {"subset_size", r.subset_size},
                    {"system", p.system_message},
                    {"user", p.user_message}}
                   .dump() +
               "\n";
    }
    io::write_file_atomic(dir / "prompts.jsonl", lines);
  }
}

ExperimentResult read_result(const std::filesystem::path& dir) {
  const auto path = dir / "records.json";
  const std::string content = io::read_file(path);
  json doc = json::parse(content, nullptr, false);
  if (doc.is_discarded()) throw IoError(path.string() + ": not valid JSON");
  try {
    return result_from_json(doc);
  } catch (const std::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace nrt
