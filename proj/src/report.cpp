#include "nrt/report.hpp"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "nrt/csv.hpp"
#include "nrt/io.hpp"

namespace nrt {

std::vector<ScalingTable> build_scaling_tables(const ExperimentResult& result) {
  if (result.aggregates.empty()) throw ReportError("result has no aggregates to report");
  std::vector<ScalingTable> tables;
  // Aggregates are ordered by (style, size), so rows arrive sorted.
  for (const auto& [key, agg] : result.aggregates) {
    if (tables.empty() || tables.back().style != key.style) tables.push_back(ScalingTable{key.style, {}});
    tables.back().rows.push_back(ScalingRow{key.subset_size, agg.mean});
  }
  return tables;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "svg-lines" || name == "svg") return ReportFormat::SvgLines;
  throw ReportError("unsupported report format '" + std::string(name) + "'");
}

std::string_view report_format_name(ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown:
      return "markdown";
    case ReportFormat::Csv:
      return "csv";
    case ReportFormat::SvgLines:
      return "svg-lines";
  }
  return "markdown";
}

namespace {

std::string md_cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out += ' ';
    else out.push_back(c);
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fixed3(double v) { return fmt::format("{:.3f}", v); }

std::string config_string(const ExperimentResult& result, const char* a, const char* b = nullptr) {
  const auto& c = result.config_echo;
  if (!c.is_object() || !c.contains(a)) return "";
  const auto& v = b ? (c[a].is_object() && c[a].contains(b) ? c[a][b] : nlohmann::json()) : c[a];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string render_markdown(const ExperimentResult& result) {
  const auto tables = build_scaling_tables(result);
  std::string out = "# Translation experiment report\n\n";
  const std::string backend = config_string(result, "backend", "kind");
  const std::string model = config_string(result, "backend", "model_name");
  out += fmt::format("- Backend: {}{}\n", backend.empty() ? "unknown" : backend, model.empty() ? "" : " (" + model + ")");
  out += fmt::format("- Temperature: {}\n", config_string(result, "backend", "temperature"));
  out += fmt::format("- Seed: {}\n", config_string(result, "seed"));
  out += fmt::format("- Metrics: {}\n", result.metrics_version);
  out += fmt::format("- Records: {} ({} failed)\n\n", result.records.size(), result.failed_count());

  out += "## Scaling by corpus size\n\n";
  for (const auto& table : tables) {
    out += fmt::format("### {}\n\n", style_name(table.style));
    out += "| Corpus size | Scored | Failed |";
    for (auto label : metrics::kMetricLabels) out += fmt::format(" {} |", label);
    out += "\n|---:|---:|---:|";
    for (std::size_t k = 0; k < metrics::kMetricCount; ++k) out += "---:|";
    out += "\n";
    for (const auto& row : table.rows) {
      const Aggregate& agg = result.aggregates.at(GroupKey{table.style, row.subset_size});
      out += fmt::format("| {} | {} | {} |", row.subset_size, agg.scored, agg.failed);
      for (auto field : metrics::kMetricFields) out += fmt::format(" {} |", fixed3(row.mean.*field));
      out += "\n";
    }
    out += "\n";
  }

  out += "## Translation outputs\n";
  for (const auto& [key, agg] : result.aggregates) {
    out += fmt::format("\n### {}, {} phrases\n\n", style_name(key.style), key.subset_size);
    out += "| Original Phrase | Translation |\n|---|---|\n";
    for (const auto& r : result.records) {
      if (r.style != key.style || r.subset_size != key.subset_size) continue;
      out += fmt::format("| {} | {} |\n", md_cell(r.reference), r.failed ? "*(failed: " + md_cell(r.error) + ")*" : md_cell(r.candidate));
    }
    const auto& m = agg.mean;
    out += fmt::format("\nMetrics: BLEU: {}, ROUGE-1: {}, ROUGE-2: {}, ROUGE-L: {}, TER: {}, METEOR: {} (corpus BLEU: {})\n",
                       fixed3(m.bleu), fixed3(m.rouge1_f), fixed3(m.rouge2_f), fixed3(m.rougeL_f), fixed3(m.ter_score),
                       fixed3(m.meteor), fixed3(agg.corpus_bleu));
  }
  return out;
}

std::string render_csv(const ExperimentResult& result) {
  const auto tables = build_scaling_tables(result);
  std::string out = "style,subset_size,metric,value\n";
  for (const auto& table : tables)
    for (const auto& row : table.rows)
      for (std::size_t k = 0; k < metrics::kMetricCount; ++k)
        out += csv::format_row(std::vector<std::string>{std::string(style_name(table.style)), std::to_string(row.subset_size),
                                                        std::string(metrics::kMetricNames[k]),
                                                        format_number(row.mean.*metrics::kMetricFields[k])});
  return out;
}

constexpr std::array<std::string_view, metrics::kMetricCount> kLineColors = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::string render_svg(const ScalingTable& table) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 60, kRight = 150, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  const double min_size = static_cast<double>(table.rows.front().subset_size);
  const double max_size = static_cast<double>(table.rows.back().subset_size);
  auto x_of = [&](std::size_t size) {
    if (max_size == min_size) return kLeft + plot_w / 2;
    return kLeft + (static_cast<double>(size) - min_size) / (max_size - min_size) * plot_w;
  };
  auto y_of = [&](double v) { return kTop + (1.0 - std::clamp(v, 0.0, 1.0)) * plot_h; };

  std::string out = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{3}: metrics by corpus size</text>\n",
      kWidth, kHeight, kLeft, xml_escape(style_name(table.style)));

  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", kLeft, kTop, kTop + plot_h);
  out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n", kLeft, kTop + plot_h, kLeft + plot_w);
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    out += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#dddddd\"/>\n", kLeft, y_of(v), kLeft + plot_w);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{:.2f}</text>\n",
                       kLeft - 6, y_of(v) + 4, v);
  }
  for (const auto& row : table.rows)
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                       x_of(row.subset_size), kTop + plot_h + 16, row.subset_size);
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">corpus size</text>\n",
                     kLeft + plot_w / 2, kHeight - 12);

  for (std::size_t k = 0; k < metrics::kMetricCount; ++k) {
    std::string points;
    for (const auto& row : table.rows) {
      if (!points.empty()) points.push_back(' ');
      points += fmt::format("{:.2f},{:.2f}", x_of(row.subset_size), y_of(row.mean.*metrics::kMetricFields[k]));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>\n", kLineColors[k], points);
    const double ly = kTop + 10 + static_cast<double>(k) * 20;
    const double lx = kLeft + plot_w + 20;
    out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"12\" height=\"3\" fill=\"{}\"/>\n", lx, ly - 3, kLineColors[k]);
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n", lx + 18, ly + 1,
                       metrics::kMetricLabels[k]);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

std::vector<ReportArtifact> render_report(const ExperimentResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::Markdown:
      return {{"report.md", render_markdown(result)}};
    case ReportFormat::Csv:
      return {{"scaling.csv", render_csv(result)}};
    case ReportFormat::SvgLines: {
      std::vector<ReportArtifact> out;
      for (const auto& table : build_scaling_tables(result))
        out.push_back({"scaling_" + std::string(style_name(table.style)) + ".svg", render_svg(table)});
      return out;
    }
  }
  throw ReportError("unsupported report format");
}

void write_report(const ExperimentResult& result, ReportFormat format, const std::filesystem::path& dir) {
  for (const auto& artifact : render_report(result, format)) io::write_file_atomic(dir / artifact.filename, artifact.content);
}

}  // namespace nrt
