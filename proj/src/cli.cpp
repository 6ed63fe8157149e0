#include "nrt/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "nrt/corpus.hpp"
#include "nrt/csv.hpp"
#include "nrt/experiment.hpp"
#include "nrt/io.hpp"
#include "nrt/metrics.hpp"
#include "nrt/prompting.hpp"
#include "nrt/report.hpp"
#include "nrt/text.hpp"

namespace nrt::cli {

namespace {

std::string paint(const Streams& s, std::string_view text, std::string_view code) {
  if (!s.color) return std::string(text);
  return fmt::format("\x1b[{}m{}\x1b[0m", code, text);
}

void warn(const Streams& s, std::string_view msg) { s.err << paint(s, "warning:", "33") << ' ' << msg << '\n'; }
void fail(const Streams& s, std::string_view msg) { s.err << paint(s, "error:", "31") << ' ' << msg << '\n'; }

std::string metric_header() {
  std::string h;
  for (auto label : metrics::kMetricLabels) h += fmt::format(" {:>8}", label);
  return h;
}

std::string metric_cells(const metrics::SentenceScores& s) {
  std::string row;
  for (auto field : metrics::kMetricFields) row += fmt::format(" {:>8.3f}", s.*field);
  return row;
}

// ---- validate ------------------------------------------------------------

struct ValidateArgs {
  std::string corpus;
  ColumnNames columns;
};

int cmd_validate(const ValidateArgs& a, const Streams& s) {
  const LoadedCorpus loaded = load_corpus(a.corpus, a.columns);
  const Corpus& corpus = loaded.corpus;
  s.out << corpus.size() << " pairs loaded from " << corpus.origin() << '\n';
  for (const auto& w : loaded.warnings) warn(s, w);
  s.out << loaded.warnings.size() << " duplicate source warnings\n";

  auto word_count = [](std::string_view t) { return text::split_whitespace(t).size(); };
  std::size_t src_min = SIZE_MAX, src_max = 0, tgt_min = SIZE_MAX, tgt_max = 0;
  for (const auto& p : corpus.pairs()) {
    src_min = std::min(src_min, word_count(p.source_text));
    src_max = std::max(src_max, word_count(p.source_text));
    tgt_min = std::min(tgt_min, word_count(p.reference_translation));
    tgt_max = std::max(tgt_max, word_count(p.reference_translation));
  }
  s.out << fmt::format("source phrase length: {}..{} words\n", src_min, src_max);
  s.out << fmt::format("translation length: {}..{} words\n", tgt_min, tgt_max);

  // A translation that appears inside another pair's translation would be
  // revealed by leave-one-out prompting; such phrases are skipped at run time.
  std::size_t leaks = 0;
  for (const auto& target : corpus.pairs()) {
    if (metrics::tokenize(target.reference_translation).size() < 2) continue;
    for (const auto& other : corpus.pairs()) {
      if (other.id == target.id) continue;
      if (text::contains_icase(format_context_line(other), target.reference_translation)) {
        warn(s, fmt::format("translation of phrase {} ('{}') appears in phrase {}; it cannot be held out cleanly",
                            target.id, target.reference_translation, other.id));
        ++leaks;
        break;
      }
    }
  }
  if (leaks) s.out << leaks << " phrases would leak their reference\n";
  return kSuccess;
}

// ---- run -----------------------------------------------------------------

struct RunArgs {
  std::string corpus;
  ColumnNames columns;
  std::vector<std::size_t> sizes{10, 50, 100};
  std::uint64_t seed = 0;
  std::string style = "both";
  std::string backend = "mock-gloss";
  std::string endpoint;
  std::string model;
  std::string api_key_env = "XAI_API_KEY";
  double temperature = 0.0;
  double timeout = 60.0;
  int retries = 3;
  std::size_t max_in_flight = 4;
  std::string cache;
  std::string out;
  std::string prompt_dir;
};

void print_aggregates(const ExperimentResult& result, const Streams& s) {
  s.out << paint(s, fmt::format("{:<20} {:>6} {:>6}{}", "style", "size", "n", metric_header()), "1") << '\n';
  for (const auto& [key, agg] : result.aggregates)
    s.out << fmt::format("{:<20} {:>6} {:>6}{}", style_name(key.style), key.subset_size, agg.scored, metric_cells(agg.mean))
          << '\n';
}

int cmd_run(const RunArgs& a, const Streams& s) {
  ExperimentConfig config;
  config.corpus_path = a.corpus;
  config.columns = a.columns;
  config.sizes = a.sizes;
  config.seed = a.seed;
  if (a.style == "both")
    config.styles = {PromptStyle::ChainOfReasoning, PromptStyle::Direct};
  else
    config.styles = {parse_style(a.style)};
  config.backend.kind = parse_backend(a.backend);
  config.backend.endpoint_url = a.endpoint;
  config.backend.model_name = a.model;
  config.backend.api_key_env = a.api_key_env;
  config.backend.temperature = a.temperature;
  config.backend.timeout = std::chrono::duration<double>(a.timeout);
  config.backend.max_retries = a.retries;
  config.max_in_flight = a.max_in_flight;
  if (!a.cache.empty()) config.cache_dir = a.cache;
  if (!a.prompt_dir.empty()) config.prompt_dir = a.prompt_dir;
  config.output_dir = a.out;

  const ExperimentResult result = run_experiment(config);
  write_result(result, config.output_dir);
  for (auto format : {ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::SvgLines})
    if (!result.aggregates.empty()) write_report(result, format, config.output_dir);

  print_aggregates(result, s);
  const std::size_t failed = result.failed_count();
  s.out << result.records.size() << " records written to " << config.output_dir.string() << '\n';
  if (failed) {
    warn(s, fmt::format("{} of {} phrases failed; they are excluded from the means (see records.csv)", failed,
                        result.records.size()));
    return kPartialFailure;
  }
  return kSuccess;
}

// ---- score ---------------------------------------------------------------

struct ScoreArgs {
  std::string input;
  std::string csv_out;
  std::string json_out;
};

int cmd_score(const ScoreArgs& a, const Streams& s) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::parse(io::read_file(a.input));
  } catch (const csv::CsvError& e) {
    throw Error(a.input + ": " + e.what());
  }
  if (rows.empty()) throw Error(a.input + ": no header row");
  const auto& header = rows.front().cells;
  auto col = [&](std::string_view name) {
    auto it = std::find_if(header.begin(), header.end(), [&](const std::string& h) { return text::trim(h) == name; });
    if (it == header.end()) throw Error(a.input + ": missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cand_col = col("candidate");
  const std::size_t ref_col = col("reference");

  struct Scored {
    std::string candidate, reference;
    metrics::SentenceScores scores;
  };
  std::vector<Scored> scored;
  std::vector<std::pair<metrics::Tokens, metrics::Tokens>> token_pairs;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.cells.size() != header.size())
      throw Error(fmt::format("{}: line {}: expected {} fields, found {}", a.input, row.line, header.size(), row.cells.size()));
    Scored item{row.cells[cand_col], row.cells[ref_col], {}};
    try {
      item.scores = metrics::score_pair(item.candidate, item.reference);
    } catch (const metrics::MetricError& e) {
      throw Error(fmt::format("{}: line {}: {}", a.input, row.line, e.what()));
    }
    token_pairs.emplace_back(metrics::tokenize(item.candidate), metrics::tokenize(item.reference));
    scored.push_back(std::move(item));
  }
  if (scored.empty()) {
    warn(s, a.input + " has no data rows; nothing to score");
    return kSuccess;
  }

  std::vector<metrics::SentenceScores> all;
  for (const auto& item : scored) all.push_back(item.scores);
  const metrics::SentenceScores mean = metrics::mean(all);
  const double corpus_bleu = metrics::bleu_corpus(token_pairs);

  s.out << paint(s, fmt::format("{:>4}{}  {}", "row", metric_header(), "candidate | reference"), "1") << '\n';
  for (std::size_t i = 0; i < scored.size(); ++i)
    s.out << fmt::format("{:>4}{}  {} | {}\n", i + 1, metric_cells(scored[i].scores), scored[i].candidate, scored[i].reference);
  s.out << fmt::format("{:>4}{}\n", "mean", metric_cells(mean));
  s.out << fmt::format("corpus BLEU: {:.3f}\n", corpus_bleu);

  if (!a.csv_out.empty()) {
    std::vector<std::string> head{"row", "candidate", "reference"};
    for (auto name : metrics::kMetricNames) head.emplace_back(name);
    std::string out = csv::format_row(head);
    auto emit = [&](std::string label, std::string c, std::string ref, const metrics::SentenceScores& sc) {
      std::vector<std::string> cells{std::move(label), std::move(c), std::move(ref)};
      for (auto field : metrics::kMetricFields) cells.push_back(format_number(sc.*field));
      out += csv::format_row(cells);
    };
    for (std::size_t i = 0; i < scored.size(); ++i) emit(std::to_string(i + 1), scored[i].candidate, scored[i].reference, scored[i].scores);
    emit("mean", "", "", mean);
    io::write_file_atomic(a.csv_out, out);
  }
  if (!a.json_out.empty()) {
    auto to_json = [](const metrics::SentenceScores& sc) {
      nlohmann::json j = nlohmann::json::object();
      for (std::size_t k = 0; k < metrics::kMetricCount; ++k) j[std::string(metrics::kMetricNames[k])] = sc.*metrics::kMetricFields[k];
      return j;
    };
    nlohmann::json doc = {{"metrics_version", metrics::kMetricsVersion}, {"rows", nlohmann::json::array()}};
    for (const auto& item : scored)
      doc["rows"].push_back({{"candidate", item.candidate}, {"reference", item.reference}, {"scores", to_json(item.scores)}});
    doc["mean"] = to_json(mean);
    doc["corpus_bleu"] = corpus_bleu;
    io::write_file_atomic(a.json_out, doc.dump(2) + "\n");
  }
  return kSuccess;
}

// ---- report --------------------------------------------------------------

struct ReportArgs {
  std::string dir;
  std::string format = "all";
  std::string out;
};

int cmd_report(const ReportArgs& a, const Streams& s) {
  const ExperimentResult result = read_result(a.dir);
  const std::filesystem::path out = a.out.empty() ? a.dir : a.out;
  std::vector<ReportFormat> formats;
  if (a.format == "all")
    formats = {ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::SvgLines};
  else
    formats = {parse_report_format(a.format)};
  for (auto f : formats) {
    for (const auto& artifact : render_report(result, f)) {
      io::write_file_atomic(out / artifact.filename, artifact.content);
      s.out << "wrote " << (out / artifact.filename).string() << '\n';
    }
  }
  return kSuccess;
}

}  // namespace

bool use_color(bool out_is_tty) {
  const char* no_color = std::getenv("NO_COLOR");
  return out_is_tty && !(no_color && *no_color);
}

int run_cli(const std::vector<std::string>& args, const Streams& streams) {
  CLI::App app{"Leave-one-out translation experiments for no-resource languages", "nrt"};
  app.require_subcommand(1);

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "Load a corpus CSV and report problems");
  validate->add_option("corpus", validate_args.corpus, "Corpus CSV")->required();
  validate->add_option("--source-col", validate_args.columns.source, "Source-language column name")->capture_default_str();
  validate->add_option("--target-col", validate_args.columns.target, "English column name")->capture_default_str();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Run leave-one-out translation over corpus subsets and score the results");
  run->add_option("--corpus", run_args.corpus, "Corpus CSV")->required();
  run->add_option("--source-col", run_args.columns.source, "Source-language column name")->capture_default_str();
  run->add_option("--target-col", run_args.columns.target, "English column name")->capture_default_str();
  run->add_option("--sizes", run_args.sizes, "Subset sizes, comma separated")->delimiter(',')->capture_default_str();
  run->add_option("--seed", run_args.seed, "Subset sampling seed")->capture_default_str();
  run->add_option("--style", run_args.style, "both, chain-of-reasoning, or direct")
      ->check(CLI::IsMember({"both", "chain-of-reasoning", "chain", "direct"}))
      ->capture_default_str();
  run->add_option("--backend", run_args.backend, "http, mock-gloss, mock-perfect, or mock-echo")
      ->check(CLI::IsMember({"http", "mock-gloss", "mock-perfect", "mock-echo"}))
      ->capture_default_str();
  run->add_option("--endpoint", run_args.endpoint, "Chat-completions URL (http backend)");
  run->add_option("--model", run_args.model, "Model name (http backend)");
  run->add_option("--api-key-env", run_args.api_key_env, "Environment variable holding the API key")->capture_default_str();
  run->add_option("--temperature", run_args.temperature, "Sampling temperature")->capture_default_str();
  run->add_option("--timeout", run_args.timeout, "Per-request timeout in seconds")->capture_default_str();
  run->add_option("--retries", run_args.retries, "Retries after a transient failure")->capture_default_str();
  run->add_option("--max-in-flight", run_args.max_in_flight, "Concurrent requests")->check(CLI::PositiveNumber)->capture_default_str();
  run->add_option("--cache", run_args.cache, "Response cache directory (http backend)");
  run->add_option("--prompt-dir", run_args.prompt_dir, "Directory with chain-of-reasoning.txt and direct.txt");
  run->add_option("--out", run_args.out, "Output directory")->required();

  ScoreArgs score_args;
  auto* score = app.add_subcommand("score", "Score a candidate,reference CSV");
  score->add_option("input", score_args.input, "CSV with candidate and reference columns")->required();
  score->add_option("--csv", score_args.csv_out, "Write per-row scores and the mean row as CSV");
  score->add_option("--json", score_args.json_out, "Write per-row scores and means as JSON");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "Regenerate report files from a result directory");
  report->add_option("dir", report_args.dir, "Directory containing records.json")->required();
  report->add_option("--format", report_args.format, "markdown, csv, svg-lines, or all")
      ->check(CLI::IsMember({"markdown", "csv", "svg-lines", "all"}))
      ->capture_default_str();
  report->add_option("--out", report_args.out, "Output directory (defaults to dir)");

  // CLI11 consumes arguments from the back, without the program name.
  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, streams.out, streams.err) == 0 ? kSuccess : kHardError;
  }

  try {
    if (*validate) return cmd_validate(validate_args, streams);
    if (*run) return cmd_run(run_args, streams);
    if (*score) return cmd_score(score_args, streams);
    if (*report) return cmd_report(report_args, streams);
  } catch (const std::exception& e) {
    fail(streams, e.what());
    return kHardError;
  }
  return kHardError;
}

}  // namespace nrt::cli
