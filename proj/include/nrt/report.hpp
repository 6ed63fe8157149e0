#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nrt/experiment.hpp"

namespace nrt {

class ReportError : public Error {
 public:
  using Error::Error;
};

struct ScalingRow {
  std::size_t subset_size = 0;
  metrics::SentenceScores mean;
};

/// One prompt style's metric means by subset size, ascending.
struct ScalingTable {
  PromptStyle style = PromptStyle::Direct;
  std::vector<ScalingRow> rows;
};

/// Throws ReportError when the result has no aggregates.
std::vector<ScalingTable> build_scaling_tables(const ExperimentResult& result);

enum class ReportFormat { Markdown, Csv, SvgLines };

/// "markdown", "csv", "svg-lines".
ReportFormat parse_report_format(std::string_view name);
std::string_view report_format_name(ReportFormat format);

struct ReportArtifact {
  std::string filename;
  std::string content;
};

/// markdown -> report.md; csv -> scaling.csv (long format, values written
/// with the shortest round-trip decimal form); svg-lines -> one
/// scaling_<style>.svg per style. Output depends only on `result`.
std::vector<ReportArtifact> render_report(const ExperimentResult& result, ReportFormat format);

void write_report(const ExperimentResult& result, ReportFormat format, const std::filesystem::path& dir);

}  // namespace nrt
