#include <doctest.h>

#include <fstream>
#include <set>

#include "nrt/corpus.hpp"
#include "nrt/hash.hpp"
#include "nrt/metrics.hpp"
#include "nrt/prompting.hpp"
#include "nrt/text.hpp"
#include "test_support.hpp"

using namespace nrt;

namespace {

Corpus small_corpus() {
  return Corpus({{1, "isha'a", "coyote"}, {2, "punni", "see"}, {3, "isha'a punni", "the coyote sees"}}, "inline");
}

void write(const std::filesystem::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

}  // namespace

TEST_CASE("style names") {
  CHECK(style_name(PromptStyle::ChainOfReasoning) == "chain-of-reasoning");
  CHECK(style_name(PromptStyle::Direct) == "direct");
  CHECK(parse_style("chain-of-reasoning") == PromptStyle::ChainOfReasoning);
  CHECK(parse_style("cor") == PromptStyle::ChainOfReasoning);
  CHECK(parse_style("chain") == PromptStyle::ChainOfReasoning);
  CHECK(parse_style("direct") == PromptStyle::Direct);
  CHECK_THROWS_AS(parse_style("Direct"), PromptError);
  CHECK_THROWS_AS(parse_style(""), PromptError);
}

TEST_CASE("direct prompt with two context pairs") {
  const auto split = leave_one_out(small_corpus(), 3);
  const auto p = build_prompt(PromptStyle::Direct, split);
  CHECK(p.style == PromptStyle::Direct);
  CHECK(p.target_id == 3);
  CHECK(p.target_source == "isha'a punni");
  CHECK(p.user_message == "isha'a punni");
  CHECK(p.system_message.find("isha'a => coyote\npunni => see") != std::string::npos);
  CHECK(p.system_message.find("{{") == std::string::npos);
  CHECK(p.system_message.find("step") == std::string::npos);
  CHECK(p.system_message.find("English translation alone on the final line") != std::string::npos);
  CHECK_FALSE(leaks_reference(p, "the coyote sees"));
}

TEST_CASE("chain-of-reasoning prompt carries the reasoning block and the same context") {
  const auto split = leave_one_out(small_corpus(), 3);
  const auto cor = build_prompt(PromptStyle::ChainOfReasoning, split);
  const auto direct = build_prompt(PromptStyle::Direct, split);
  CHECK(cor.system_message != direct.system_message);
  CHECK(cor.user_message == direct.user_message);
  CHECK(cor.system_message.find("isha'a => coyote\npunni => see") != std::string::npos);
  for (const char* step : {"1.", "2.", "3.", "4."}) CHECK(cor.system_message.find(step) != std::string::npos);
  CHECK(text::contains_icase(cor.system_message, "grammar"));
  CHECK(text::contains_icase(cor.system_message, "vocabulary"));
  CHECK(cor.system_message.find("English translation alone on the final line") != std::string::npos);
}

TEST_CASE("rendered prompt invariants across the synthetic corpus") {
  const auto corpus = load_corpus(testing::corpus_path()).corpus;
  for (auto style : {PromptStyle::ChainOfReasoning, PromptStyle::Direct}) {
    for (const auto& pair : corpus.pairs()) {
      const auto split = leave_one_out(corpus, pair.id);
      const auto p = build_prompt(style, split);
      CHECK(text::count_occurrences(p.user_message, pair.source_text) == 1);
      if (metrics::tokenize(pair.reference_translation).size() >= 2) {
        CHECK_FALSE(text::contains_icase(p.system_message, pair.reference_translation));
        CHECK_FALSE(text::contains_icase(p.user_message, pair.reference_translation));
      }
      // context lines appear once each, in order
      std::size_t cursor = 0;
      for (const auto& c : split.context) {
        const auto line = format_context_line(c);
        const auto at = p.system_message.find(line + "\n", cursor);
        const auto at_end = p.system_message.find(line, cursor);
        REQUIRE(at_end != std::string::npos);
        CHECK((at != std::string::npos || at_end != std::string::npos));
        cursor = at_end + line.size();
      }
      CHECK(build_prompt(style, split).system_message == p.system_message);
    }
  }
}

TEST_CASE("different contexts give different system messages") {
  const auto corpus = load_corpus(testing::corpus_path()).corpus;
  std::set<std::string> seen;
  for (const auto& pair : corpus.pairs())
    CHECK(seen.insert(build_prompt(PromptStyle::Direct, leave_one_out(corpus, pair.id)).system_message).second);
}

TEST_CASE("build_prompt errors") {
  SUBCASE("empty context") {
    LeaveOneOutSplit split{{1, "a", "b"}, {}};
    CHECK_THROWS_AS(build_prompt(PromptStyle::Direct, split), PromptError);
  }
  SUBCASE("reference contained in another pair's translation") {
    const Corpus c({{1, "ka", "big dog"}, {2, "ka mo", "the big dog runs"}}, "inline");
    CHECK_THROWS_WITH_AS(build_prompt(PromptStyle::Direct, leave_one_out(c, 1)),
                         doctest::Contains("phrase 1"), PromptError);
    CHECK_NOTHROW(build_prompt(PromptStyle::Direct, leave_one_out(c, 2)));
  }
  SUBCASE("single-word references are not leaks") {
    const Corpus c({{1, "ka", "dog"}, {2, "ka mo", "dog runs"}}, "inline");
    CHECK_NOTHROW(build_prompt(PromptStyle::Direct, leave_one_out(c, 1)));
  }
}

TEST_CASE("leaks_reference is case-insensitive") {
  RenderedPrompt p{"known: The Big Dog => x", "y", PromptStyle::Direct, 1, "y"};
  CHECK(leaks_reference(p, "the big dog"));
  CHECK_FALSE(leaks_reference(p, "the small dog"));
  CHECK_FALSE(leaks_reference(p, "dog"));
}

TEST_CASE("extract_candidate") {
  CHECK(extract_candidate("Reasoning...\nTranslation: The dog is sleeping.") == "The dog is sleeping.");
  CHECK(extract_candidate("\"The lizard will dance.\"") == "The lizard will dance.");
  CHECK_THROWS_AS(extract_candidate("   \n  "), PromptError);
  CHECK_THROWS_AS(extract_candidate(""), PromptError);
  CHECK(extract_candidate("The dog runs") == "The dog runs");
  CHECK(extract_candidate("Step 1: ...\n\n**Translation:** *The bear cooked the wood.*\n\n") == "The bear cooked the wood.");
  CHECK(extract_candidate("final answer: `the girl sings`") == "the girl sings");
  CHECK(extract_candidate("Thinking.\r\nEnglish translation: “We are sleeping.”\r\n") == "We are sleeping.");
  CHECK(extract_candidate("The meaning:\nThe dog runs\n**Translation:**") == "The dog runs");
  CHECK(extract_candidate("- Answer: that lizard flies") == "that lizard flies");
}

TEST_CASE("template parsing") {
  const auto t = PromptTemplate::parse("Sys {{context}}\n=== user ===\nSay {{target}}\n", "mem");
  CHECK(t.system == "Sys {{context}}");
  CHECK(t.user == "Say {{target}}");
  CHECK(PromptTemplate::parse("{{context}}\r\n=== user ===\r\n{{target}}", "crlf").user == "{{target}}");
  CHECK_THROWS_WITH_AS(PromptTemplate::parse("{{context}} {{target}}", "f.txt"), doctest::Contains("f.txt"), PromptError);
  CHECK_THROWS_AS(PromptTemplate::parse("no slot\n=== user ===\n{{target}}", "x"), PromptError);
  CHECK_THROWS_AS(PromptTemplate::parse("{{context}}\n=== user ===\nnothing", "x"), PromptError);
  CHECK_THROWS_AS(PromptTemplate::parse("{{context}}\n=== user ===\n{{target}} {{target}}", "x"), PromptError);
  CHECK_THROWS_AS(PromptTemplate::parse("{{context}} {{target}}\n=== user ===\n{{target}}", "x"), PromptError);
}

TEST_CASE("template directory override") {
  testing::TempDir dir;
  write(dir / "chain-of-reasoning.txt", "COR\n{{context}}\n=== user ===\nQ: {{target}}\n");
  write(dir / "direct.txt", "DIRECT\n{{context}}\n=== user ===\n{{target}}\n");
  const auto templates = PromptTemplates::load_dir(dir.path());
  const auto split = leave_one_out(small_corpus(), 1);
  const auto p = build_prompt(PromptStyle::ChainOfReasoning, split, templates);
  CHECK(p.system_message == "COR\npunni => see\nisha'a punni => the coyote sees");
  CHECK(p.user_message == "Q: isha'a");
  CHECK(templates.fingerprint(PromptStyle::Direct) == sha256_hex("DIRECT\n{{context}}\n=== user ===\n{{target}}"));
  CHECK(templates.fingerprint(PromptStyle::Direct) != PromptTemplates::builtin().fingerprint(PromptStyle::Direct));
  CHECK(PromptTemplates::builtin().fingerprint(PromptStyle::Direct) !=
        PromptTemplates::builtin().fingerprint(PromptStyle::ChainOfReasoning));

  std::filesystem::remove(dir / "direct.txt");
  CHECK_THROWS_AS(PromptTemplates::load_dir(dir.path()), PromptError);
}
