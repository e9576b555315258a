#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmfractal/cli.hpp"
#include "lmfractal/errors.hpp"
#include "lmfractal/ingest.hpp"
#include "lmfractal/synth.hpp"

using namespace lmfractal;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  auto p = fs::path(LMFRACTAL_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Human fGn(0.6) and LLM fGn(0.8) documents sharing pair ids, in one store.
fs::path paired_store(const fs::path& dir) {
  auto human = generate({.process = SynthProcess::fgn, .hurst_target = 0.6, .n_docs = 60, .doc_length = 464,
                         .rng_seed = 11});
  auto llm = generate({.process = SynthProcess::fgn, .hurst_target = 0.8, .n_docs = 60, .doc_length = 464,
                       .rng_seed = 12});
  std::vector<DocumentRecord> all;
  for (std::size_t i = 0; i < 60; ++i) {
    auto h = human.documents[i];
    h.id = "h" + std::to_string(i);
    h.source = Source::human;
    h.generator_model.reset();
    h.domain = "news";
    for (auto& v : h.scores) v += 3.0;
    auto l = llm.documents[i];
    l.id = "l" + std::to_string(i);
    l.source = Source::llm;
    l.domain = "news";
    l.prompt_method = i % 2 ? "cot" : "su";
    l.quality_rating = i % 2 ? 4 : 2;
    l.pair_id = h.id;
    for (auto& v : l.scores) v += 2.0;
    all.push_back(h);
    all.push_back(l);
  }
  auto p = dir / "store.jsonl";
  write_records(all, p);
  return p;
}

}  // namespace

TEST_CASE("sha256_file") {
  auto dir = tmp("sha");
  std::ofstream(dir / "abc.txt") << "abc";
  CHECK(sha256_file(dir / "abc.txt") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK_THROWS_AS(sha256_file(dir / "missing"), IoError);
}

TEST_CASE("settings CSV round-trips") {
  SettingRow r;
  r.key.set(KeyField::domain, "news, wire");
  r.key.set(KeyField::temperature, "0.5");
  r.n_docs = 12;
  r.mean_log_ppl = 2.0000000000000004;
  r.mean_log_ppl_se = 0.1;
  r.mean_quality = 3.25;
  FractalEstimate h;
  h.kind = ExponentKind::hurst;
  h.point = 0.7123456789012345;
  h.boot_mean = 0.71;
  h.boot_std = 1e-3;
  h.fit.r_squared = 0.99;
  h.fit.slope = 0.7123456789012345;
  h.fit.intercept = -0.3;
  h.resamples = {0.7, 0.72, 0.69};
  h.failed_resamples = 1;
  r.hurst = h;
  r.holder_error = "fewer than 3 scales, \"quoted\"";
  SettingRow bare;
  bare.key.set(KeyField::source, "human");

  auto text = settings_csv({r, bare});
  auto back = parse_settings_csv(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].key == r.key);
  CHECK(back[0].mean_log_ppl == r.mean_log_ppl);
  CHECK(back[0].mean_quality == r.mean_quality);
  REQUIRE(back[0].hurst);
  CHECK(back[0].hurst->point == h.point);
  CHECK(back[0].hurst->resamples == h.resamples);
  CHECK(back[0].hurst->failed_resamples == 1);
  CHECK_FALSE(back[0].holder);
  CHECK(back[0].holder_error == r.holder_error);
  CHECK_FALSE(back[1].mean_quality);
  CHECK(settings_csv(back) == text);

  CHECK_THROWS_AS(parse_settings_csv("a,b\n"), ParseError);
}

TEST_CASE("synth then estimate recovers H and is byte-stable") {
  auto dir = tmp("estimate");
  auto store = dir / "fgn.jsonl";
  auto s = run({"synth", "--process", "fgn", "--hurst", "0.7", "--docs", "500", "--len", "464", "--seed", "1",
                "--out", store.string()});
  REQUIRE(s.code == 0);
  CHECK(fs::exists(dir / "manifest.json"));

  auto a = run({"estimate", "--store", store.string(), "--deterministic", "--out", (dir / "a").string()});
  REQUIRE_MESSAGE(a.code == 0, a.err);
  auto rows = parse_settings_csv(slurp(dir / "a" / "settings.csv"));
  REQUIRE(rows.size() == 1);
  REQUIRE(rows[0].hurst);
  CHECK(rows[0].hurst->point >= 0.65);
  CHECK(rows[0].hurst->point <= 0.75);
  CHECK(rows[0].n_docs == 500);

  auto b = run({"estimate", "--store", store.string(), "--deterministic", "--out", (dir / "b").string()});
  REQUIRE(b.code == 0);
  for (const char* f : {"settings.csv", "results.csv", "diagnostics.csv", "fit_holder.svg", "fit_hurst.svg"})
    CHECK_MESSAGE(slurp(dir / "a" / f) == slurp(dir / "b" / f), f);
  auto manifest = slurp(dir / "a" / "manifest.json");
  CHECK(manifest.find("\"timestamp\": null") != std::string::npos);
  CHECK(manifest.find(sha256_file(store)) != std::string::npos);
  CHECK(slurp(dir / "a" / "results.csv").rfind("group_key,statistic,value,stderr,n_docs\n", 0) == 0);

  SUBCASE("report redraws from the CSVs") {
    auto r = run({"report", "--settings", (dir / "a" / "settings.csv").string(), "--diagnostics",
                  (dir / "a" / "diagnostics.csv").string(), "--deterministic", "--out", (dir / "r").string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    CHECK(fs::exists(dir / "r" / "fit_hurst.svg"));
    CHECK(fs::exists(dir / "r" / "exponents_hurst.svg"));
  }
  SUBCASE("timestamps appear without --deterministic") {
    auto c = run({"estimate", "--store", store.string(), "--boot", "2", "--out", (dir / "c").string()});
    REQUIRE(c.code == 0);
    CHECK(slurp(dir / "c" / "fit_hurst.svg").find("<!-- generated") != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  auto dir = tmp("codes");
  auto store = dir / "iid.jsonl";
  REQUIRE(run({"synth", "--process", "iid", "--docs", "5", "--len", "500", "--out", store.string()}).code == 0);

  auto empty = run({"estimate", "--store", store.string(), "domain=patent", "--out", dir.string()});
  CHECK(empty.code == kExitEmptySelection);
  CHECK(empty.err.find("available keys") != std::string::npos);
  CHECK(empty.err.find("domain=synthetic") != std::string::npos);

  CHECK(run({"estimate", "--store", store.string(), "colour=red", "--out", dir.string()}).code == kExitFailure);
  CHECK(run({"estimate", "--store", store.string(), "--scales", "8,4,16", "--out", dir.string()}).code ==
        kExitFailure);
  CHECK(run({"estimate", "--store", (dir / "nope.jsonl").string()}).code == kExitFailure);
  CHECK(run({"frobnicate"}).code == kExitFailure);
  CHECK(run({"--help"}).code == kExitOk);
}

TEST_CASE("config file mirrors flags and loses to the command line") {
  auto dir = tmp("config");
  auto cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"seed": 5, "deterministic": true, "synth": {"docs": 7, "len": 20, "process": "iid"}})";
  auto out = dir / "a.jsonl";
  REQUIRE(run({"--config", cfg.string(), "synth", "--out", out.string()}).code == 0);
  auto a = read_records(out, InputFormat::canonical).records;
  CHECK(a.size() == 7);
  CHECK(a[0].id.find("-5-") != std::string::npos);
  CHECK(slurp(dir / "manifest.json").find("\"timestamp\": null") != std::string::npos);

  auto over = dir / "b.jsonl";
  REQUIRE(run({"--config", cfg.string(), "synth", "--docs", "3", "--out", over.string()}).code == 0);
  CHECK(read_records(over, InputFormat::canonical).records.size() == 3);

  std::ofstream(dir / "bad.json") << R"({"sede": 5})";
  CHECK(run({"--config", (dir / "bad.json").string(), "synth", "--out", over.string()}).code == kExitFailure);
}

TEST_CASE("ingest converts GAGLE and tallies rejections") {
  auto dir = tmp("ingest");
  std::ofstream(dir / "gagle.jsonl")
      << R"({"ID":"n-1","Model":"Mistral-7B","Domain":"newsroom","Prompt":"cot","Temperature":0.5,"Log-Perplexity Scores":[1,2]})"
      << "\n"
      << R"({"ID":"n-1","Model":"Mistral-7B","Domain":"newsroom","Prompt":"poem","Log-Perplexity Scores":[1]})"
      << "\n{bad\n"
      << R"({"ID":"n-1","Model":"human","Domain":"newsroom","Log-Perplexity Scores":[3]})" << "\n";
  auto r = run({"ingest", (dir / "gagle.jsonl").string(), "--format", "gagle", "--out", (dir / "o").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  auto recs = read_records(dir / "o" / "records.jsonl", InputFormat::canonical).records;
  CHECK(recs.size() == 2);
  auto summary = slurp(dir / "o" / "ingest_summary.csv");
  CHECK(summary.find(",read,4\n") != std::string::npos);
  CHECK(summary.find(",kept,2\n") != std::string::npos);
  CHECK(summary.find(",rejected,2\n") != std::string::npos);
  CHECK(summary.find("rejected:malformed_json,1") != std::string::npos);

  CHECK(run({"ingest", (dir / "gagle.jsonl").string(), "--format", "gagle", "--strict", "--out",
             (dir / "s").string()})
            .code == kExitFailure);
}

TEST_CASE("compare, mix, mi and quality on a paired store") {
  auto dir = tmp("paired");
  auto store = paired_store(dir).string();
  std::vector<std::string> common{"--deterministic", "--boot", "3", "--seed", "2"};
  auto with = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), common.begin(), common.end());
    args.push_back("--out");
    args.push_back(out.string());
    return run(args);
  };

  auto c = with({"compare", "--store", store, "--llm", "domain=news", "--human", "domain=news"}, dir / "cmp");
  REQUIRE_MESSAGE(c.code == 0, c.err);
  auto results = slurp(dir / "cmp" / "results.csv");
  CHECK(results.find("log_ratio_hurst") != std::string::npos);
  CHECK(results.find("mean_log_ratio_hurst") != std::string::npos);
  CHECK(results.find("unpaired_dropped,0,") != std::string::npos);
  CHECK(fs::exists(dir / "cmp" / "ratios.svg"));
  auto again = with({"compare", "--store", store, "--llm", "domain=news", "--human", "domain=news"}, dir / "cmp2");
  CHECK(slurp(dir / "cmp2" / "results.csv") == results);

  auto m = with({"mix", "--store", store, "--ratios", "0,0.5,1", "--size", "40", "--seeds", "1,2"}, dir / "mix");
  REQUIRE_MESSAGE(m.code == 0, m.err);
  auto mix = slurp(dir / "mix" / "results.csv");
  CHECK(mix.find("ratio=0.5;seed=2,mix_hurst") != std::string::npos);
  CHECK(mix.find("autocorrelation") != std::string::npos);
  CHECK(fs::exists(dir / "mix" / "mix_hurst.svg"));

  auto e = with({"estimate", "--store", store, "source=llm"}, dir / "est");
  REQUIRE_MESSAGE(e.code == 0, e.err);
  auto settings = (dir / "est" / "settings.csv").string();
  CHECK(parse_settings_csv(slurp(settings)).size() == 2);

  auto mi = with({"mi", "--settings", settings, "--target", "h", "--vars", "prompt_method", "--uncertainty",
                  "prompt_method"},
                 dir / "mi");
  REQUIRE_MESSAGE(mi.code == 0, mi.err);
  auto mi_csv = slurp(dir / "mi" / "mi.csv");
  CHECK(mi_csv.find("prompt_method|hurst,mi_nats") != std::string::npos);
  CHECK(mi_csv.find("uncertainty_reduction") != std::string::npos);

  auto q = with({"quality", "--settings", settings}, dir / "q");
  REQUIRE_MESSAGE(q.code == 0, q.err);
  CHECK(q.out.find("fewer than 3 settings") != std::string::npos);
  CHECK(fs::exists(dir / "q" / "quality_hurst.svg"));
}
