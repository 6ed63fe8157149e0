#include "nrt/prompting.hpp"

#include <array>
#include <regex>

#include "nrt/hash.hpp"
#include "nrt/io.hpp"
#include "nrt/metrics.hpp"
#include "nrt/text.hpp"
#include "prompt_assets.hpp"

namespace nrt {

namespace {

constexpr std::string_view kContextSlot = "{{context}}";
constexpr std::string_view kTargetSlot = "{{target}}";
constexpr std::string_view kUserSeparator = "=== user ===";

std::string fill(std::string_view tmpl, std::string_view slot, std::string_view value) {
  std::string out;
  std::size_t pos = 0;
  for (std::size_t hit = tmpl.find(slot); hit != std::string_view::npos; hit = tmpl.find(slot, pos)) {
    out.append(tmpl.substr(pos, hit - pos));
    out.append(value);
    pos = hit + slot.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

std::string raw_text(const PromptTemplate& t) {
  return t.system + "\n" + std::string(kUserSeparator) + "\n" + t.user;
}

}  // namespace

std::string_view style_name(PromptStyle style) {
  switch (style) {
    case PromptStyle::ChainOfReasoning:
      return "chain-of-reasoning";
    case PromptStyle::Direct:
      return "direct";
  }
  return "direct";
}

PromptStyle parse_style(std::string_view name) {
  if (name == "chain-of-reasoning" || name == "chain" || name == "cor") return PromptStyle::ChainOfReasoning;
  if (name == "direct") return PromptStyle::Direct;
  throw PromptError("unknown prompt style '" + std::string(name) + "'");
}

PromptTemplate PromptTemplate::parse(std::string_view file_text, std::string_view origin) {
  // Separator must sit on its own line.
  std::size_t pos = 0;
  std::size_t sep = std::string_view::npos;
  while (pos <= file_text.size()) {
    std::size_t eol = file_text.find('\n', pos);
    if (eol == std::string_view::npos) eol = file_text.size();
    std::string_view line = file_text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line == kUserSeparator) {
      sep = pos;
      pos = eol;
      break;
    }
    pos = eol + 1;
  }
  if (sep == std::string_view::npos)
    throw PromptError(std::string(origin) + ": missing '" + std::string(kUserSeparator) + "' line");

  PromptTemplate t;
  t.system = std::string(text::trim(file_text.substr(0, sep)));
  t.user = pos < file_text.size() ? std::string(text::trim(file_text.substr(pos))) : std::string();
  if (t.system.find(kContextSlot) == std::string::npos)
    throw PromptError(std::string(origin) + ": system part lacks " + std::string(kContextSlot));
  if (text::count_occurrences(t.user, kTargetSlot) != 1)
    throw PromptError(std::string(origin) + ": user part must contain " + std::string(kTargetSlot) + " exactly once");
  if (t.system.find(kTargetSlot) != std::string::npos)
    throw PromptError(std::string(origin) + ": system part must not contain " + std::string(kTargetSlot));
  return t;
}

PromptTemplates::PromptTemplates(PromptTemplate chain, PromptTemplate direct)
    : chain_(std::move(chain)), direct_(std::move(direct)) {}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates templates(PromptTemplate::parse(assets::kChainOfReasoningTemplate, "builtin chain-of-reasoning"),
                                         PromptTemplate::parse(assets::kDirectTemplate, "builtin direct"));
  return templates;
}

PromptTemplates PromptTemplates::load_dir(const std::filesystem::path& dir) {
  auto load = [&](PromptStyle style) {
    const auto path = dir / (std::string(style_name(style)) + ".txt");
    std::string content;
    try {
      content = io::read_file(path);
    } catch (const IoError& e) {
      throw PromptError(e.what());
    }
    return PromptTemplate::parse(content, path.string());
  };
  return PromptTemplates(load(PromptStyle::ChainOfReasoning), load(PromptStyle::Direct));
}

const PromptTemplate& PromptTemplates::get(PromptStyle style) const {
  return style == PromptStyle::ChainOfReasoning ? chain_ : direct_;
}

std::string PromptTemplates::fingerprint(PromptStyle style) const { return sha256_hex(raw_text(get(style))); }

std::string format_context_line(const PhrasePair& pair) {
  return pair.source_text + " => " + pair.reference_translation;
}

RenderedPrompt build_prompt(PromptStyle style, const LeaveOneOutSplit& split, const PromptTemplates& templates) {
  if (split.context.empty()) throw PromptError("cannot build a prompt with an empty context");

  std::string context;
  for (const auto& pair : split.context) {
    if (!context.empty()) context.push_back('\n');
    context += format_context_line(pair);
  }
  const PromptTemplate& t = templates.get(style);
  RenderedPrompt prompt{fill(t.system, kContextSlot, context), fill(t.user, kTargetSlot, split.target.source_text),
                        style, split.target.id, split.target.source_text};
  if (leaks_reference(prompt, split.target.reference_translation))
    throw PromptError("prompt for phrase " + std::to_string(split.target.id) +
                      " would reveal its reference translation '" + split.target.reference_translation +
                      "' (another context pair contains it)");
  return prompt;
}

bool leaks_reference(const RenderedPrompt& prompt, std::string_view reference) {
  if (metrics::tokenize(reference).size() < 2) return false;
  return text::contains_icase(prompt.system_message, reference) || text::contains_icase(prompt.user_message, reference);
}

namespace {

std::string_view strip_wrappers(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 11> kPairs = {{
      {"**", "**"}, {"__", "__"}, {"*", "*"}, {"_", "_"}, {"`", "`"}, {"\"", "\""}, {"'", "'"},
      {"“", "”"}, {"‘", "’"}, {"«", "»"}, {"„", "“"},
  }};
  for (bool changed = true; changed;) {
    changed = false;
    s = text::trim(s);
    for (const auto& [open, close] : kPairs) {
      if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close)) {
        s = s.substr(open.size(), s.size() - open.size() - close.size());
        changed = true;
        break;
      }
    }
  }
  return s;
}

std::string_view strip_label(std::string_view s) {
  static const std::regex kLabel(R"(^\s*(?:[-*>#]+\s*)?(?:\*\*|__)?\s*(?:final\s+|english\s+)*(?:translation|answer)\s*(?:\*\*|__)?\s*:\s*(?:\*\*|__)?)",
                                 std::regex::icase);
  std::match_results<std::string_view::const_iterator> m;
  if (std::regex_search(s.begin(), s.end(), m, kLabel)) s.remove_prefix(static_cast<std::size_t>(m.length(0)));
  return s;
}

std::string_view clean_line(std::string_view line) {
  // Label first: "**Translation:** *text*" would otherwise lose mismatched stars.
  std::string_view s = text::trim(line);
  if (std::string_view unlabeled = strip_label(s); unlabeled.size() != s.size()) return strip_wrappers(unlabeled);
  s = strip_wrappers(s);
  s = strip_label(s);
  return strip_wrappers(s);
}

}  // namespace

std::string extract_candidate(std::string_view raw_response) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= raw_response.size()) {
    std::size_t eol = raw_response.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw_response.size();
    std::string_view line = text::trim(raw_response.substr(pos, eol - pos));
    if (!line.empty()) lines.push_back(line);
    pos = eol + 1;
  }
  if (lines.empty()) throw PromptError("response is empty");

  // A last line holding only a label or markup ("**Translation:**") leaves
  // nothing; walk back to the nearest line with content.
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::string_view cleaned = clean_line(*it);
    if (!cleaned.empty()) return std::string(cleaned);
  }
  return std::string(lines.back());
}

}  // namespace nrt
