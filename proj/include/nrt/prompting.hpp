#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "nrt/corpus.hpp"
#include "nrt/error.hpp"

namespace nrt {

class PromptError : public Error {
 public:
  using Error::Error;
};

enum class PromptStyle { ChainOfReasoning, Direct };

/// "chain-of-reasoning" or "direct"; also used in file names.
std::string_view style_name(PromptStyle style);

/// Accepts the style names plus the short forms "chain" and "cor".
PromptStyle parse_style(std::string_view name);

/// A style's template: a system part containing `{{context}}` and a user part
/// containing `{{target}}`. On disk both live in one file, separated by a line
/// reading exactly `=== user ===`.
struct PromptTemplate {
  std::string system;
  std::string user;

  static PromptTemplate parse(std::string_view file_text, std::string_view origin);
};

class PromptTemplates {
 public:
  /// Templates compiled in from the repository's prompts/ directory.
  static const PromptTemplates& builtin();

  /// Reads `<dir>/chain-of-reasoning.txt` and `<dir>/direct.txt`.
  static PromptTemplates load_dir(const std::filesystem::path& dir);

  const PromptTemplate& get(PromptStyle style) const;

  /// SHA-256 hex digest of the style's template text, recorded in results.
  std::string fingerprint(PromptStyle style) const;

 private:
  PromptTemplates(PromptTemplate chain, PromptTemplate direct);
  PromptTemplate chain_;
  PromptTemplate direct_;
};

struct RenderedPrompt {
  std::string system_message;
  std::string user_message;
  PromptStyle style = PromptStyle::Direct;
  std::size_t target_id = 0;
  std::string target_source;
};

/// `<source> => <translation>`
std::string format_context_line(const PhrasePair& pair);

/// Renders `split` with `style`. Throws PromptError when the context is empty
/// or when the rendered text would contain the target's reference translation
/// (possible only if another pair's translation contains it verbatim).
RenderedPrompt build_prompt(PromptStyle style, const LeaveOneOutSplit& split,
                            const PromptTemplates& templates = PromptTemplates::builtin());

/// Case-insensitive scan of both messages for `reference`. References shorter
/// than two tokens are never reported, since single words recur legitimately.
bool leaks_reference(const RenderedPrompt& prompt, std::string_view reference);

/// Pulls the answer out of a model reply: the last non-empty line, with a
/// leading `Translation:`-style label, markdown emphasis, and wrapping quotes
/// removed. Throws PromptError on an all-whitespace reply.
std::string extract_candidate(std::string_view raw_response);

}  // namespace nrt
