#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "lmfractal/errors.hpp"
#include "lmfractal/ingest.hpp"

using namespace lmfractal;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  auto dir = fs::temp_directory_path() / "lmfractal_test_ingest";
  fs::create_directories(dir);
  auto p = dir / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("parse_canonical_record") {
  SUBCASE("minimal record") {
    auto r = parse_canonical_record(
        R"({"id":"d1","source":"human","scoring_model":"m","domain":"wikipedia","scores":[1.0,2.0]})");
    CHECK(r.id == "d1");
    CHECK(r.source == Source::human);
    CHECK(r.scores == std::vector<double>{1.0, 2.0});
    CHECK_FALSE(r.generator_model.has_value());
  }
  SUBCASE("full LLM record") {
    auto r = parse_canonical_record(
        R"({"id":"x","source":"llm","generator_model":"Mistral-7B","generator_kind":"instruction_tuned",)"
        R"("scoring_model":"Gemma-2B","domain":"newsroom","prompt_method":"su+","temperature":0.5,)"
        R"("quality_text":"ok\nRating: 4","quality_rating":4,"pair_id":"n-1","scores":[0.5]})");
    CHECK(r.generator_kind == GeneratorKind::instruction_tuned);
    CHECK(r.prompt_method == "su+");
    CHECK(r.temperature == 0.5);
    CHECK(r.quality_rating == 4);
    CHECK(r.pair_id == "n-1");
  }
  SUBCASE("empty scores") {
    try {
      parse_canonical_record(R"({"id":"d","source":"human","scoring_model":"m","domain":"w","scores":[]})");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.field() == "scores");
    }
  }
  SUBCASE("missing scores") {
    CHECK_THROWS_AS(parse_canonical_record(R"({"id":"d","source":"human","scoring_model":"m","domain":"w"})"),
                    ValidationError);
  }
  SUBCASE("malformed JSON carries the line number") {
    try {
      parse_canonical_record(R"({"id": "d", )", 17);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 17);
    }
  }
  SUBCASE("invariant violations") {
    CHECK_THROWS_AS(parse_canonical_record(R"({"id":"d","source":"human","generator_model":"g",)"
                                           R"("scoring_model":"m","domain":"w","scores":[1]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_canonical_record(R"({"id":"d","source":"llm","quality_rating":6,)"
                                           R"("scoring_model":"m","domain":"w","scores":[1]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_canonical_record(R"({"id":"d","source":"llm","prompt_method":"summary",)"
                                           R"("scoring_model":"m","domain":"w","scores":[1]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_canonical_record(R"({"id":"d","source":"llm","scoring_model":"m",)"
                                           R"("domain":"w","scores":[1,"x"]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_canonical_record(R"({"id":"d","source":"llm","scoring_model":"m",)"
                                           R"("domain":"w","scores":[1],"temprature":1})"),
                    ValidationError);
  }
}

TEST_CASE("parse_quality_rating") {
  CHECK(parse_quality_rating("...repetitive and unnecessarily long.\n\nRating: 3/5") == 3);
  CHECK(parse_quality_rating("**Bad:** thin.\n\nRating: 4\n") == 4);
  CHECK(parse_quality_rating("1") == 1);
  CHECK(parse_quality_rating("Rating: 2 / 5  ") == 2);
  CHECK(parse_quality_rating("Rating: 5") == 5);
  CHECK_THROWS_AS(parse_quality_rating("no rating here."), ExtractionError);
  CHECK_THROWS_AS(parse_quality_rating("Rating: 9"), ExtractionError);
  CHECK_THROWS_AS(parse_quality_rating("Rating: 0"), ExtractionError);
  CHECK_THROWS_AS(parse_quality_rating("   \n"), ExtractionError);
  // Digits on earlier lines are not ratings.
  CHECK_THROWS_AS(parse_quality_rating("Scored in 2013.\nNo verdict."), ExtractionError);
}

TEST_CASE("normalize_prompt_label") {
  CHECK(normalize_prompt_label("continue (pt)") ==
        std::pair<std::string, std::optional<GeneratorKind>>{"cont", GeneratorKind::pretrained});
  CHECK(normalize_prompt_label("continue (it)").second == GeneratorKind::instruction_tuned);
  CHECK(normalize_prompt_label("summary + keywords").first == "su+");
  CHECK(normalize_prompt_label("Summary+Keywords").first == "su+");
  CHECK(normalize_prompt_label("short keywords").first == "kw");
  CHECK(normalize_prompt_label("keywords").first == "kw+");
  CHECK(normalize_prompt_label("excerpt").first == "exc");
  CHECK(normalize_prompt_label("kw+").first == "kw+");
  try {
    normalize_prompt_label("poem");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("su+") != std::string::npos);
  }
}

TEST_CASE("parse_gagle_record") {
  SUBCASE("pretrained continuation") {
    auto r = parse_gagle_record(
        R"({"ID":"newsroom-00001-00064-6","Model":"Mistral-7B","Domain":"NEWSROOM",)"
        R"j("Prompt":"continue (pt)","Temperature":0.5,"Prefix":"p","Text":"t",)j"
        R"("Quality":"Good.\n\nRating: 4","Log-Perplexity Scores":[2.5,1.25]})");
    CHECK(r.source == Source::llm);
    CHECK(r.generator_kind == GeneratorKind::pretrained);
    CHECK(r.prompt_method == "cont");
    CHECK(r.temperature == 0.5);
    CHECK(r.domain == "newsroom");
    CHECK(r.quality_rating == 4);
    CHECK(r.quality_text == "Good.\n\nRating: 4");
    CHECK(r.pair_id == "newsroom-00001-00064-6");
  }
  SUBCASE("temperature 1.0") {
    auto r = parse_gagle_record(R"({"ID":"a","Model":"Gemma-2B","Domain":"wikipedia","Prompt":"cot",)"
                                R"("Temperature":1.0,"Log-Perplexity Scores":[1]})");
    CHECK(r.temperature == 1.0);
  }
  SUBCASE("unparseable quality keeps the text") {
    auto r = parse_gagle_record(R"({"ID":"a","Model":"Gemma-2B","Domain":"wikipedia","Prompt":"cot",)"
                                R"("Quality":"meh","Log-Perplexity Scores":[1]})");
    CHECK(r.quality_text == "meh");
    CHECK_FALSE(r.quality_rating.has_value());
  }
  SUBCASE("ground truth") {
    auto r = parse_gagle_record(R"({"ID":"a","Model":"human","Domain":"billsum","Log-Perplexity Scores":[1]})");
    CHECK(r.source == Source::human);
    CHECK(r.id == "a");
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(parse_gagle_record(R"({"ID":"a","Model":"g","Domain":"w","Prompt":"poem",)"
                                       R"("Log-Perplexity Scores":[1]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_gagle_record(R"({"ID":"a","Model":"g","Domain":"w","Prompt":"cot"})"),
                    ValidationError);
  }
  SUBCASE("canonical re-serialization round-trips") {
    auto r = parse_gagle_record(
        R"({"ID":"x-1","Model":"Mistral-7B","Domain":"scientific","Prompt":"su+","Temperature":0.5,)"
        R"("Quality":"fine\nRating: 3/5","Log-Perplexity Scores":[0.1,2.0000000000000004,1e-7]})");
    auto line = to_canonical_json(r);
    auto back = parse_canonical_record(line);
    CHECK(back == r);
    CHECK(to_canonical_json(back) == line);
    CHECK(back.prompt_method == "su+");
    CHECK(back.temperature == 0.5);
  }
}

TEST_CASE("canonical serialization round-trips random records") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(2.0, 1.5);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    DocumentRecord r;
    r.id = "doc-" + std::to_string(trial) + (coin(rng) ? ",\"quoted\"" : "");
    r.source = coin(rng) ? Source::llm : Source::human;
    r.scoring_model = "scorer";
    r.domain = "d" + std::to_string(trial % 5);
    if (r.source == Source::llm) {
      if (coin(rng)) r.generator_model = "gen";
      if (coin(rng)) r.generator_kind = GeneratorKind::instruction_tuned;
      if (coin(rng)) r.prompt_method = std::string(kPromptMethods[trial % 7]);
      if (coin(rng)) r.temperature = 0.5 * (trial % 3);
    }
    if (coin(rng)) r.quality_text = "text\n\"with\" unicode é";
    if (coin(rng)) r.quality_rating = 1 + trial % 5;
    if (coin(rng)) r.pair_id = "p" + std::to_string(trial);
    r.scores.resize(1 + trial % 40);
    for (auto& v : r.scores) v = normal(rng);
    auto back = parse_canonical_record(to_canonical_json(r));
    CHECK(back == r);
  }
}

TEST_CASE("read_records, load_corpus and write_results") {
  auto path = temp_file("store.jsonl",
                        R"({"id":"a","source":"human","scoring_model":"m","domain":"news","scores":[3,1,2]})"
                        "\n\n"
                        R"({"id":"b","source":"llm","scoring_model":"m","domain":"news","temperature":1,"scores":[1]})"
                        "\n"
                        R"({"id":"c","source":"llm","scoring_model":"m","domain":"wiki","temperature":0.5,"scores":[2]})"
                        "\n");
  SUBCASE("filter by domain keeps order and scores") {
    auto c = load_corpus(path, Filter::parse({"domain=news"}));
    REQUIRE(c.size() == 2);
    CHECK(c.documents[0].id == "a");
    CHECK(c.documents[0].scores == std::vector<double>{3, 1, 2});
    CHECK(c.key.label() == "domain=news");
  }
  SUBCASE("numeric temperature match") {
    auto c = load_corpus(path, Filter::parse({"temperature=1.0"}));
    REQUIRE(c.size() == 1);
    CHECK(c.documents[0].id == "b");
  }
  SUBCASE("zero matches") {
    CHECK_THROWS_AS(load_corpus(path, Filter::parse({"domain=patent"})), EmptySelectionError);
  }
  SUBCASE("unknown filter key") {
    CHECK_THROWS_AS(Filter::parse({"colour=red"}), ValidationError);
  }
  SUBCASE("unreadable path") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/x.jsonl", Filter{}), IoError);
  }
  SUBCASE("lenient read tallies rejections") {
    auto bad = temp_file("bad.jsonl",
                         R"({"id":"a","source":"human","scoring_model":"m","domain":"n","scores":[1]})"
                         "\n{oops\n"
                         R"({"id":"b","source":"human","scoring_model":"m","domain":"n","scores":[]})"
                         "\n");
    auto loaded = read_records(bad, InputFormat::canonical, false);
    CHECK(loaded.summary.read == 3);
    CHECK(loaded.summary.kept == 1);
    CHECK(loaded.summary.rejected == 2);
    CHECK(loaded.summary.rejection_reasons.at("malformed_json") == 1);
    CHECK(loaded.summary.rejection_reasons.at("invalid_scores") == 1);
    CHECK_THROWS_AS(read_records(bad, InputFormat::canonical, true), ParseError);
  }
  SUBCASE("results CSV column order") {
    AnalysisTable t;
    t.add("domain=news", "hurst", 0.75, 0.01, 12);
    t.add("a,b", "holder", 0.5, std::nullopt, 3);
    auto out = fs::temp_directory_path() / "lmfractal_test_ingest" / "results.csv";
    write_results(t, out);
    std::ifstream in(out);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text ==
          "group_key,statistic,value,stderr,n_docs\n"
          "domain=news,hurst,0.75,0.01,12\n"
          "\"a,b\",holder,0.5,,3\n");
    CHECK_THROWS_AS(write_results(t, "/nonexistent/dir/r.csv"), IoError);
    CHECK_THROWS_AS(t.add("g", "not_a_statistic", 1.0, std::nullopt, 1), ValidationError);
  }
}
