#include <doctest.h>

#include <cmath>

#include "lmfractal/errors.hpp"
#include "lmfractal/fractal.hpp"
#include "lmfractal/numeric.hpp"
#include "lmfractal/synth.hpp"

using namespace lmfractal;

namespace {

// Pooled sample autocovariance at lag k, centered on the pooled mean.
double pooled_autocov(const Corpus& c, std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& d : c.documents)
    for (double v : d.scores) {
      sum += v;
      ++n;
    }
  double m = sum / static_cast<double>(n);
  double acc = 0.0;
  std::size_t cnt = 0;
  for (const auto& d : c.documents)
    for (std::size_t t = 0; t + k < d.scores.size(); ++t) {
      acc += (d.scores[t] - m) * (d.scores[t + k] - m);
      ++cnt;
    }
  return acc / static_cast<double>(cnt);
}

}  // namespace

TEST_CASE("fgn_autocovariance") {
  CHECK(fgn_autocovariance(0.7, 0) == doctest::Approx(1.0));
  for (std::size_t k = 1; k < 10; ++k) CHECK(std::abs(fgn_autocovariance(0.5, k)) < 1e-15);
  CHECK(fgn_autocovariance(0.8, 1) == doctest::Approx(0.5 * (std::pow(2.0, 1.6) - 2.0)));
  CHECK(fgn_autocovariance(0.8, 1) == doctest::Approx(0.5157).epsilon(1e-3));
}

TEST_CASE("gen_iid") {
  SynthSpec spec{.n_docs = 500, .doc_length = 400, .rng_seed = 1};
  auto c = gen_iid(spec);
  REQUIRE(c.size() == 500);
  for (const auto& d : c.documents) {
    CHECK(d.scores.size() == 400);
    CHECK(d.source == Source::synthetic);
  }
  std::vector<double> all;
  for (const auto& d : c.documents) all.insert(all.end(), d.scores.begin(), d.scores.end());
  CHECK(std::abs(mean(all)) < 0.01);
  CHECK(std::abs(population_std(all) - 1.0) < 0.01);

  SUBCASE("deterministic") {
    auto again = gen_iid(spec);
    CHECK(again.documents == c.documents);
    spec.rng_seed = 2;
    CHECK_FALSE(gen_iid(spec).documents == c.documents);
  }
}

TEST_CASE("gen_fgn") {
  SUBCASE("H=0.8 autocovariance matches gamma(k) at lags 0..5") {
    auto c = gen_fgn({.process = SynthProcess::fgn, .hurst_target = 0.8, .n_docs = 500,
                      .doc_length = 400, .rng_seed = 3});
    for (std::size_t k = 0; k <= 5; ++k)
      CHECK(std::abs(pooled_autocov(c, k) - fgn_autocovariance(0.8, k)) <= 0.02);
    auto z = standardize_corpus(c.series());
    CHECK(std::abs(autocorrelation(z, 1) - 0.5157) <= 0.02);
  }
  SUBCASE("H=0.5 reduces to white noise") {
    auto c = gen_fgn({.process = SynthProcess::fgn, .hurst_target = 0.5, .n_docs = 500,
                      .doc_length = 400, .rng_seed = 4});
    for (std::size_t k = 1; k <= 5; ++k) CHECK(std::abs(pooled_autocov(c, k)) <= 0.02);
    CHECK(std::abs(pooled_autocov(c, 0) - 1.0) <= 0.02);
  }
  SUBCASE("H=0.3 anti-persistent") {
    auto c = gen_fgn({.process = SynthProcess::fgn, .hurst_target = 0.3, .n_docs = 500,
                      .doc_length = 400, .rng_seed = 5});
    CHECK(std::abs(pooled_autocov(c, 1) - fgn_autocovariance(0.3, 1)) <= 0.02);
  }
  SUBCASE("estimate_hurst round trip at H=0.7") {
    auto c = gen_fgn({.process = SynthProcess::fgn, .hurst_target = 0.7, .n_docs = 500,
                      .doc_length = 400, .rng_seed = 6});
    CHECK(std::abs(estimate_hurst(c.series(), EstimationConfig{}).point - 0.7) <= 0.05);
  }
  SUBCASE("deterministic and equal-length") {
    SynthSpec spec{.process = SynthProcess::fgn, .hurst_target = 0.6, .n_docs = 10, .doc_length = 333,
                   .rng_seed = 7};
    auto a = gen_fgn(spec);
    CHECK(a.documents == gen_fgn(spec).documents);
    for (const auto& d : a.documents) CHECK(d.scores.size() == 333);
  }
  SUBCASE("invalid target") {
    CHECK_THROWS_AS(gen_fgn({.process = SynthProcess::fgn, .hurst_target = 1.0}), ValidationError);
    CHECK_THROWS_AS(gen_fgn({.process = SynthProcess::fgn, .hurst_target = 0.0}), ValidationError);
  }
}

TEST_CASE("gen_repetition") {
  SUBCASE("period 1 without noise is constant") {
    auto c = gen_repetition({.process = SynthProcess::repetition, .period = 1, .noise_std = 0.0,
                             .n_docs = 4, .doc_length = 400, .rng_seed = 8});
    for (const auto& d : c.documents)
      for (double v : d.scores) CHECK(v == d.scores.front());
    CHECK_THROWS_AS(estimate_hurst(c.series(), EstimationConfig{}), InsufficientScalesError);
  }
  SUBCASE("period 8 is strongly autocorrelated at its period") {
    auto c = gen_repetition({.process = SynthProcess::repetition, .period = 8, .noise_std = 0.05,
                             .n_docs = 200, .doc_length = 400, .rng_seed = 9});
    auto z = standardize_corpus(c.series());
    CHECK(autocorrelation(z, 8) >= 0.9);
  }
  SUBCASE("tiles the block") {
    auto c = gen_repetition({.process = SynthProcess::repetition, .period = 5, .noise_std = 0.0,
                             .n_docs = 2, .doc_length = 23, .rng_seed = 10});
    for (const auto& d : c.documents)
      for (std::size_t t = 5; t < d.scores.size(); ++t) CHECK(d.scores[t] == d.scores[t - 5]);
  }
}

TEST_CASE("generate dispatch and process names") {
  CHECK(parse_synth_process("fgn") == SynthProcess::fgn);
  CHECK(parse_synth_process("iid") == SynthProcess::iid_gaussian);
  CHECK_FALSE(parse_synth_process("pink").has_value());
  auto c = generate({.process = SynthProcess::repetition, .period = 4, .n_docs = 3, .doc_length = 16});
  CHECK(c.size() == 3);
}
