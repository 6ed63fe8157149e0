#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "cli_support.hpp"
#include "nrt/experiment.hpp"
#include "nrt/io.hpp"
#include "test_support.hpp"

using namespace nrt;
using testing::invoke;

TEST_CASE("validate") {
  SUBCASE("synthetic corpus") {
    const auto o = invoke({"validate", testing::corpus_path().string()});
    CHECK(o.code == 0);
    CHECK(o.out.find("100 pairs loaded") != std::string::npos);
    CHECK(o.out.find("0 duplicate source warnings") != std::string::npos);
    CHECK(o.out.find("source phrase length: 1..") != std::string::npos);
  }
  SUBCASE("empty cell names its line") {
    const auto o = invoke({"validate", testing::data_path("corpus_empty_cell_line7.csv").string()});
    CHECK(o.code == 1);
    CHECK(o.err.find("line 7") != std::string::npos);
  }
  SUBCASE("duplicates are warnings") {
    const auto o = invoke({"validate", testing::data_path("corpus_duplicates.csv").string()});
    CHECK(o.code == 0);
    CHECK(o.out.find("duplicate source warnings") != std::string::npos);
    CHECK(o.out.find("0 duplicate") == std::string::npos);
  }
  SUBCASE("custom column names") {
    CHECK(invoke({"validate", testing::data_path("corpus_custom_cols.csv").string()}).code == 1);
    const auto o = invoke({"validate", testing::data_path("corpus_custom_cols.csv").string(), "--source-col", "src",
                           "--target-col", "english"});
    CHECK(o.code == 0);
  }
  SUBCASE("missing file") { CHECK(invoke({"validate", "/nonexistent/x.csv"}).code == 1); }
}

TEST_CASE("argument errors") {
  CHECK(invoke({}).code == 1);
  CHECK(invoke({"frobnicate"}).code == 1);
  CHECK(invoke({"validate", testing::corpus_path().string(), "--bogus"}).code == 1);
  CHECK(invoke({"run", "--corpus", testing::corpus_path().string()}).code == 1);  // no --out
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({"run", "--help"}).out.find("--max-in-flight") != std::string::npos);
}

TEST_CASE("run with mock-perfect") {
  testing::TempDir dir;
  const auto o = invoke({"run", "--corpus", testing::corpus_path().string(), "--backend", "mock-perfect", "--sizes", "10",
                         "--seed", "1", "--out", (dir / "out").string()});
  CHECK(o.code == 0);
  const auto agg = io::read_file(dir / "out" / "aggregates.csv");
  CHECK(agg.find("chain-of-reasoning,10,") != std::string::npos);
  const auto result = read_result(dir / "out");
  CHECK(result.records.size() == 20);
  for (const auto& [key, a] : result.aggregates) {
    CHECK(a.mean.bleu == 1.0);
    CHECK(a.mean.ter_score == 1.0);
    CHECK(a.mean.meteor >= 0.98);
  }
  for (const char* f : {"report.md", "scaling.csv", "scaling_direct.svg", "scaling_chain-of-reasoning.svg", "prompts.jsonl"})
    CHECK(std::filesystem::exists(dir / "out" / f));
}

TEST_CASE("run twice gives identical files") {
  testing::TempDir dir;
  for (const char* sub : {"a", "b"})
    REQUIRE(invoke({"run", "--corpus", testing::corpus_path().string(), "--backend", "mock-gloss", "--sizes", "10,50",
                    "--seed", "3", "--style", "direct", "--out", (dir / sub).string()})
                .code == 0);
  for (const char* f : {"records.csv", "aggregates.csv", "report.md", "scaling.csv", "config.json"})
    CHECK(io::read_file(dir / "a" / f) == io::read_file(dir / "b" / f));
}

TEST_CASE("run option errors") {
  testing::TempDir dir;
  const std::string corpus = testing::corpus_path().string();
  const std::string out = (dir / "out").string();
  SUBCASE("http without a key") {
    testing::ScopedEnv env("NRT_CLI_TEST_KEY", nullptr);
    const auto o = invoke({"run", "--corpus", corpus, "--backend", "http", "--endpoint", "http://127.0.0.1:9", "--model", "m",
                           "--api-key-env", "NRT_CLI_TEST_KEY", "--out", out});
    CHECK(o.code == 1);
    CHECK(o.err.find("NRT_CLI_TEST_KEY") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(dir / "out" / "records.csv"));
  }
  SUBCASE("http without a model") {
    testing::ScopedEnv env("NRT_CLI_TEST_KEY", "k");
    CHECK(invoke({"run", "--corpus", corpus, "--backend", "http", "--endpoint", "http://127.0.0.1:9", "--api-key-env",
                  "NRT_CLI_TEST_KEY", "--out", out})
              .code == 1);
  }
  SUBCASE("bad size") {
    const auto o = invoke({"run", "--corpus", corpus, "--sizes", "1", "--out", out});
    CHECK(o.code == 1);
    CHECK(o.err.find("outside") != std::string::npos);
  }
  SUBCASE("unknown backend and style") {
    CHECK(invoke({"run", "--corpus", corpus, "--backend", "gpt", "--out", out}).code == 1);
    CHECK(invoke({"run", "--corpus", corpus, "--style", "fancy", "--out", out}).code == 1);
  }
  SUBCASE("no api key flag exists") {
    CHECK(invoke({"run", "--corpus", corpus, "--api-key", "x", "--out", out}).code == 1);
  }
}

TEST_CASE("partial failure exits 2") {
  testing::TempDir dir;
  std::ofstream(dir / "c.csv") << "source,translation\nka,big dog\nka mo,the big dog runs\npu,small cat\n";
  const auto o = invoke({"run", "--corpus", (dir / "c.csv").string(), "--backend", "mock-gloss", "--sizes", "3", "--out",
                         (dir / "out").string()});
  CHECK(o.code == 2);
  CHECK(read_result(dir / "out").failed_count() == 2);
}

TEST_CASE("score") {
  testing::TempDir dir;
  SUBCASE("published chain pairs") {
    const auto o = invoke({"score", testing::data_path("published_chain_10.csv").string(), "--json", (dir / "s.json").string(),
                           "--csv", (dir / "s.csv").string()});
    CHECK(o.code == 0);
    const auto doc = nlohmann::json::parse(io::read_file(dir / "s.json"));
    CHECK(doc["rows"].size() == 10);
    CHECK(doc["mean"]["bleu"].get<double>() == doctest::Approx(0.234).epsilon(0.002));
    CHECK(o.out.find("mean") != std::string::npos);
    CHECK(io::read_file(dir / "s.csv").find("\nmean,,,") != std::string::npos);
  }
  SUBCASE("identical columns") {
    std::ofstream(dir / "same.csv") << "candidate,reference\nThe bear is sleeping.,The bear is sleeping.\nWe run.,We run.\n";
    REQUIRE(invoke({"score", (dir / "same.csv").string(), "--json", (dir / "s.json").string()}).code == 0);
    const auto mean = nlohmann::json::parse(io::read_file(dir / "s.json"))["mean"];
    for (const char* k : {"bleu", "rouge1_f", "rouge2_f", "rougeL_f", "ter_score"}) CHECK(mean[k] == 1.0);
    CHECK(mean["meteor"].get<double>() < 1.0);
    CHECK(mean["meteor"].get<double>() > 0.9);
  }
  SUBCASE("no data rows") {
    const auto o = invoke({"score", testing::data_path("score_empty.csv").string()});
    CHECK(o.code == 0);
    CHECK(o.out.empty());
    CHECK(o.err.find("no data rows") != std::string::npos);
  }
  SUBCASE("empty reference") {
    std::ofstream(dir / "bad.csv") << "candidate,reference\na b,a b\nx,\n";
    const auto o = invoke({"score", (dir / "bad.csv").string()});
    CHECK(o.code == 1);
    CHECK(o.err.find("line 3") != std::string::npos);
  }
  SUBCASE("missing column") {
    std::ofstream(dir / "bad.csv") << "hyp,reference\na,a\n";
    CHECK(invoke({"score", (dir / "bad.csv").string()}).code == 1);
  }
  SUBCASE("malformed CSV") {
    std::ofstream(dir / "bad.csv") << "candidate,reference\n\"open,a\n";
    CHECK(invoke({"score", (dir / "bad.csv").string()}).code == 1);
  }
}

TEST_CASE("report regenerates the run's files byte for byte") {
  testing::TempDir dir;
  const auto run_dir = dir / "run";
  REQUIRE(invoke({"run", "--corpus", testing::corpus_path().string(), "--backend", "mock-gloss", "--seed", "9", "--out",
                  run_dir.string()})
              .code == 0);
  const auto o = invoke({"report", run_dir.string(), "--out", (dir / "again").string()});
  CHECK(o.code == 0);
  for (const char* f : {"report.md", "scaling.csv", "scaling_chain-of-reasoning.svg", "scaling_direct.svg"})
    CHECK(io::read_file(run_dir / f) == io::read_file(dir / "again" / f));
  const auto md = io::read_file(run_dir / "report.md");
  std::size_t tables = 0;
  for (auto p = md.find("| Corpus size |"); p != std::string::npos; p = md.find("| Corpus size |", p + 1)) ++tables;
  CHECK(tables == 2);

  SUBCASE("svg only") {
    testing::TempDir svg;
    CHECK(invoke({"report", run_dir.string(), "--format", "svg-lines", "--out", svg.path().string()}).code == 0);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(svg.path())) files += e.path().extension() == ".svg";
    CHECK(files == 2);
  }
  SUBCASE("unsupported format") { CHECK(invoke({"report", run_dir.string(), "--format", "pdf"}).code == 1); }
  SUBCASE("corrupted records.json") {
    std::ofstream(run_dir / "records.json") << "[1, 2";
    const auto bad = invoke({"report", run_dir.string()});
    CHECK(bad.code == 1);
    CHECK(bad.err.find("records.json") != std::string::npos);
  }
  SUBCASE("missing directory") { CHECK(invoke({"report", (dir / "nope").string()}).code == 1); }
}

TEST_CASE("color follows NO_COLOR") {
  {
    testing::ScopedEnv env("NO_COLOR", "1");
    CHECK_FALSE(cli::use_color(true));
  }
  testing::ScopedEnv env("NO_COLOR", nullptr);
  CHECK(cli::use_color(true));
  CHECK_FALSE(cli::use_color(false));
}
