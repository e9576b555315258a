#include <doctest.h>

#include <numeric>

#include "lmfractal/errors.hpp"
#include "lmfractal/preprocess.hpp"

using namespace lmfractal;

namespace {

DocumentRecord doc(std::string id, std::size_t n, Source source = Source::llm,
                   std::optional<std::string> pair = std::nullopt) {
  DocumentRecord r;
  r.id = std::move(id);
  r.source = source;
  r.scoring_model = "m";
  r.domain = "news";
  r.pair_id = std::move(pair);
  r.scores.resize(n);
  std::iota(r.scores.begin(), r.scores.end(), 0.0);
  return r;
}

}  // namespace

TEST_CASE("trim_warmup") {
  PreprocessConfig cfg;
  auto r = trim_warmup(doc("a", 500), cfg);
  CHECK(r.scores.size() == 436);
  CHECK(r.scores.front() == 64.0);

  cfg.warmup_tokens = 0;
  auto same = doc("b", 10);
  CHECK(trim_warmup(same, cfg) == same);

  cfg.warmup_tokens = 64;
  CHECK(trim_warmup(doc("c", 50), cfg).scores.empty());
}

TEST_CASE("filter_and_clip") {
  PreprocessConfig cfg;
  auto out = filter_and_clip({doc("a", 436), doc("b", 380), doc("c", 401)}, cfg);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "a");
  CHECK(out[1].id == "c");
  for (const auto& r : out) CHECK(r.scores.size() == 400);

  CHECK(filter_and_clip({doc("a", 10), doc("b", 399)}, cfg).empty());

  auto exact = filter_and_clip({doc("a", 400)}, cfg);
  REQUIRE(exact.size() == 1);
  CHECK(exact[0].scores.size() == 400);

  SUBCASE("config invariants") {
    PreprocessConfig bad{.warmup_tokens = 0, .min_length = 300, .clip_length = 400};
    CHECK_THROWS_AS(filter_and_clip({}, bad), ValidationError);
  }
}

TEST_CASE("preprocess trims before filtering") {
  PreprocessConfig cfg;
  auto out = preprocess({doc("a", 500), doc("b", 450), doc("c", 464)}, cfg);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == "a");
  CHECK(out[1].id == "c");
  CHECK(out[1].scores.front() == 64.0);
  CHECK(out[1].scores.size() == 400);
}

TEST_CASE("pair_filter") {
  PreprocessConfig cfg;
  SUBCASE("short LLM document drops its human partner") {
    auto res = pair_filter({doc("l1", 300, Source::llm, "p1"), doc("l2", 420, Source::llm, "p2")},
                           {doc("h1", 500, Source::human, "p1"), doc("h2", 410, Source::human, "p2")}, cfg);
    REQUIRE(res.llm.size() == 1);
    REQUIRE(res.human.size() == 1);
    CHECK(res.llm[0].id == "l2");
    CHECK(res.human[0].id == "h2");
    CHECK(res.length_dropped == 1);
    CHECK(res.unpaired_dropped == 0);
  }
  SUBCASE("both long enough are kept at clip length") {
    auto res = pair_filter({doc("l1", 450, Source::llm, "p1")}, {doc("h1", 500, Source::human, "p1")}, cfg);
    REQUIRE(res.llm.size() == 1);
    CHECK(res.llm[0].scores.size() == 400);
    CHECK(res.human[0].scores.size() == 400);
  }
  SUBCASE("missing human partner counts as unpaired") {
    auto res = pair_filter({doc("l1", 450, Source::llm, "p1"), doc("l2", 450, Source::llm, "p9")},
                           {doc("h1", 500, Source::human, "p1")}, cfg);
    CHECK(res.llm.size() == 1);
    CHECK(res.unpaired_dropped == 1);
  }
  SUBCASE("human without LLM partner is dropped symmetrically") {
    auto res = pair_filter({doc("l1", 450, Source::llm, "p1")},
                           {doc("h1", 500, Source::human, "p1"), doc("h2", 500, Source::human, "p2")}, cfg);
    CHECK(res.human.size() == 1);
    CHECK(res.unpaired_dropped == 1);
  }
  SUBCASE("human pairing key falls back to id") {
    auto res = pair_filter({doc("l1", 450, Source::llm, "h7")}, {doc("h7", 500, Source::human)}, cfg);
    CHECK(res.llm.size() == 1);
  }
  SUBCASE("duplicate pair ids") {
    CHECK_THROWS_AS(pair_filter({doc("l1", 450, Source::llm, "p1"), doc("l2", 450, Source::llm, "p1")},
                                {doc("h1", 500, Source::human, "p1")}, cfg),
                    ValidationError);
    CHECK_THROWS_AS(pair_filter({doc("l1", 450, Source::llm, "p1")},
                                {doc("h1", 500, Source::human, "p1"), doc("h2", 500, Source::human, "p1")}, cfg),
                    ValidationError);
  }
  SUBCASE("sides stay bijective") {
    std::vector<DocumentRecord> llm;
    std::vector<DocumentRecord> human;
    for (int i = 0; i < 30; ++i) {
      llm.push_back(doc("l" + std::to_string(i), 380 + 3 * i, Source::llm, "p" + std::to_string(i)));
      if (i % 4 != 0)
        human.push_back(doc("h" + std::to_string(i), 500 - 5 * i, Source::human, "p" + std::to_string(i)));
    }
    auto res = pair_filter(llm, human, cfg);
    REQUIRE(res.llm.size() == res.human.size());
    for (std::size_t i = 0; i < res.llm.size(); ++i) {
      CHECK(res.llm[i].pair_id == res.human[i].pair_id);
      CHECK(res.llm[i].scores.size() == 400);
    }
  }
}
