#include "lmfractal/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "lmfractal/errors.hpp"
#include "lmfractal/numeric.hpp"

namespace lmfractal {

std::string_view to_string(ExponentKind k) { return k == ExponentKind::holder ? "holder" : "hurst"; }

std::string_view to_string(StandardizeMode m) {
  return m == StandardizeMode::corpus ? "corpus" : "document";
}

std::optional<StandardizeMode> parse_standardize_mode(std::string_view s) {
  if (s == "corpus") return StandardizeMode::corpus;
  if (s == "document") return StandardizeMode::document;
  return std::nullopt;
}

void EstimationConfig::validate() const {
  if (scales.size() < 3) throw ValidationError("scales", "at least 3 scales are required");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (scales[i] <= 0) throw ValidationError("scales", "must be positive");
    if (i > 0 && scales[i] <= scales[i - 1]) throw ValidationError("scales", "must be strictly increasing");
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon", "must be > 0");
  if (bootstrap_samples < 1) throw ValidationError("bootstrap_samples", "must be >= 1");
}

void EstimationConfig::validate_for_length(std::size_t length) const {
  validate();
  if (static_cast<std::size_t>(scales.back()) >= length)
    throw ValidationError("scales", "largest scale " + std::to_string(scales.back()) +
                                        " must be below the document length " + std::to_string(length));
}

bool FractalEstimate::operator==(const FractalEstimate& o) const {
  auto same_points = [](const PowerLawFit& a, const PowerLawFit& b) {
    return a.slope == b.slope && a.intercept == b.intercept && a.r_squared == b.r_squared &&
           a.points == b.points;
  };
  auto same_mass = [](const ScaleMassPoint& a, const ScaleMassPoint& b) {
    return a.tau == b.tau && a.mass == b.mass && a.hit_count == b.hit_count &&
           a.window_count == b.window_count;
  };
  auto same_rs = [](const RescaledRangePoint& a, const RescaledRangePoint& b) {
    return a.n == b.n && a.mean_ratio == b.mean_ratio && a.block_count == b.block_count;
  };
  return kind == o.kind && point == o.point && boot_mean == o.boot_mean && boot_std == o.boot_std &&
         same_points(fit, o.fit) && n_documents == o.n_documents && resamples == o.resamples &&
         failed_resamples == o.failed_resamples &&
         std::equal(mass_points.begin(), mass_points.end(), o.mass_points.begin(), o.mass_points.end(),
                    same_mass) &&
         std::equal(rs_points.begin(), rs_points.end(), o.rs_points.begin(), o.rs_points.end(), same_rs);
}

namespace {

std::size_t common_length(std::span<const Series> corpus) {
  if (corpus.empty()) throw ValidationError("corpus", "must contain at least one document");
  std::size_t len = corpus.front().size();
  for (const auto& d : corpus)
    if (d.size() != len) throw ValidationError("corpus", "documents must have equal length");
  return len;
}

}  // namespace

std::vector<Series> standardize_corpus(std::span<const Series> corpus, StandardizeMode mode) {
  common_length(corpus);
  std::vector<Series> out(corpus.begin(), corpus.end());
  auto apply = [](Series& s, double m, double sd) {
    for (auto& v : s) v = (v - m) / sd;
  };
  if (mode == StandardizeMode::document) {
    for (auto& s : out) {
      double sd = population_std(s);
      if (!(sd > 0.0)) throw DegenerateCorpusError("a document has zero variance");
      apply(s, mean(s), sd);
    }
    return out;
  }
  CompensatedSum sum;
  std::size_t count = 0;
  for (const auto& s : corpus) {
    for (double v : s) sum.add(v);
    count += s.size();
  }
  if (count == 0) throw DegenerateCorpusError("corpus has no scores");
  double m = sum.value() / static_cast<double>(count);
  CompensatedSum sq;
  for (const auto& s : corpus)
    for (double v : s) sq.add((v - m) * (v - m));
  double sd = std::sqrt(sq.value() / static_cast<double>(count));
  if (!(sd > 0.0)) throw DegenerateCorpusError("pooled variance is zero");
  for (auto& s : out) apply(s, m, sd);
  return out;
}

Series integral_process(std::span<const double> x) {
  Series X(x.size() + 1, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) X[t + 1] = X[t] + x[t];
  return X;
}

ScaleMassPoint holder_mass(std::span<const Series> corpus_std, int tau, double epsilon) {
  if (tau <= 0) throw ValidationError("tau", "must be positive");
  ScaleMassPoint p;
  p.tau = tau;
  const auto step = static_cast<std::size_t>(tau);
  for (const auto& doc : corpus_std) {
    if (doc.size() < step) continue;
    auto X = integral_process(doc);
    for (std::size_t t = 0; t + step < X.size(); ++t) {
      ++p.window_count;
      if (std::abs(X[t + step] - X[t]) <= epsilon) ++p.hit_count;
    }
  }
  if (p.window_count == 0)
    throw ValidationError("tau", "scale " + std::to_string(tau) + " exceeds every document length");
  p.mass = static_cast<double>(p.hit_count) / static_cast<double>(p.window_count);
  return p;
}

FractalEstimate estimate_holder(std::span<const Series> corpus, const EstimationConfig& cfg) {
  cfg.validate_for_length(common_length(corpus));
  auto standardized = standardize_corpus(corpus, cfg.standardize);
  FractalEstimate est;
  est.kind = ExponentKind::holder;
  est.n_documents = corpus.size();
  std::vector<std::pair<double, double>> usable;
  std::vector<std::pair<double, double>> all;
  for (int tau : cfg.scales) {
    auto p = holder_mass(standardized, tau, cfg.epsilon);
    est.mass_points.push_back(p);
    all.emplace_back(tau, p.mass);
    if (p.hit_count > 0) usable.emplace_back(tau, p.mass);
  }
  if (usable.size() < 3)
    throw InsufficientScalesError("only " + std::to_string(usable.size()) +
                                      " scales have nonzero mass; 3 are required",
                                  std::move(all));
  est.fit = fit_power_law(usable);
  est.point = -est.fit.slope;
  est.boot_mean = est.point;
  return est;
}

std::optional<double> rs_statistic(std::span<const double> x, std::size_t n) {
  if (n == 0 || n > x.size()) throw ValidationError("n", "must be in 1..length");
  auto prefix = x.first(n);
  double sd = population_std(prefix);
  double scale = 0.0;
  for (double v : prefix) scale = std::max(scale, std::abs(v));
  if (!(sd > 1e-12 * scale)) return std::nullopt;

  CompensatedSum running;
  double Y = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  for (std::size_t t = 1; t <= n; ++t) {
    double v = prefix[t - 1];
    running.add(v);
    Y += v - running.value() / static_cast<double>(t);
    lo = std::min(lo, Y);
    hi = std::max(hi, Y);
  }
  return (hi - lo) / sd;
}

FractalEstimate estimate_hurst(std::span<const Series> corpus, const EstimationConfig& cfg) {
  cfg.validate_for_length(common_length(corpus));
  FractalEstimate est;
  est.kind = ExponentKind::hurst;
  est.n_documents = corpus.size();
  std::vector<std::pair<double, double>> usable;
  std::vector<std::pair<double, double>> all;
  for (int n : cfg.scales) {
    CompensatedSum sum;
    std::size_t count = 0;
    for (const auto& doc : corpus) {
      if (auto r = rs_statistic(doc, static_cast<std::size_t>(n))) {
        sum.add(*r);
        ++count;
      }
    }
    if (count == 0) {
      all.emplace_back(n, 0.0);
      continue;
    }
    double m = sum.value() / static_cast<double>(count);
    all.emplace_back(n, m);
    if (!(m > 0.0)) continue;
    est.rs_points.push_back({n, m, count});
    usable.emplace_back(n, m);
  }
  if (usable.size() < 3)
    throw InsufficientScalesError("only " + std::to_string(usable.size()) +
                                      " scales have non-degenerate R/S; 3 are required",
                                  std::move(all));
  est.fit = fit_power_law(usable);
  est.point = est.fit.slope;
  est.boot_mean = est.point;
  return est;
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3)
    throw InsufficientScalesError("power-law fit needs at least 3 points",
                                  {points.begin(), points.end()});
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& [s, v] : points) {
    if (!(s > 0.0) || !(v > 0.0) || !std::isfinite(s) || !std::isfinite(v))
      throw ValidationError("points", "coordinates must be positive and finite");
    lx.push_back(std::log(s));
    ly.push_back(std::log(v));
  }
  double mx = mean(lx);
  double my = mean(ly);
  CompensatedSum sxx;
  CompensatedSum sxy;
  CompensatedSum syy;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    double dx = lx[i] - mx;
    double dy = ly[i] - my;
    sxx.add(dx * dx);
    sxy.add(dx * dy);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0)) throw ValidationError("points", "scales must not all be equal");
  PowerLawFit fit;
  fit.points.assign(points.begin(), points.end());
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  if (syy.value() <= 0.0) {
    fit.r_squared = 1.0;
  } else {
    CompensatedSum ssr;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ssr.add(r * r);
    }
    fit.r_squared = std::clamp(1.0 - ssr.value() / syy.value(), 0.0, 1.0);
  }
  return fit;
}

FractalEstimate estimate(std::span<const Series> corpus, ExponentKind kind,
                         const EstimationConfig& cfg) {
  return kind == ExponentKind::holder ? estimate_holder(corpus, cfg) : estimate_hurst(corpus, cfg);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

FractalEstimate bootstrap(std::span<const Series> corpus, ExponentKind kind,
                          const EstimationConfig& cfg) {
  if (corpus.empty()) throw ValidationError("corpus", "must contain at least one document");
  auto est = estimate(corpus, kind, cfg);
  est.resamples.clear();
  est.failed_resamples = 0;
  std::vector<Series> resample(corpus.size());
  for (std::size_t b = 0; b < cfg.bootstrap_samples; ++b) {
    std::mt19937_64 rng(derive_seed(cfg.rng_seed, b));
    std::uniform_int_distribution<std::size_t> pick(0, corpus.size() - 1);
    for (auto& doc : resample) doc = corpus[pick(rng)];
    try {
      est.resamples.push_back(estimate(resample, kind, cfg).point);
    } catch (const EstimationError&) {
      ++est.failed_resamples;
    }
  }
  if (2 * est.failed_resamples > cfg.bootstrap_samples)
    throw BootstrapError(std::to_string(est.failed_resamples) + " of " +
                         std::to_string(cfg.bootstrap_samples) + " bootstrap resamples failed");
  est.boot_mean = mean(est.resamples);
  est.boot_std = sample_std(est.resamples);
  return est;
}

double autocorrelation(std::span<const Series> corpus_std, std::size_t lag) {
  CompensatedSum sum;
  std::size_t count = 0;
  for (const auto& doc : corpus_std) {
    for (std::size_t t = 0; t + lag < doc.size(); ++t) {
      sum.add(doc[t + lag] * doc[t]);
      ++count;
    }
  }
  if (count == 0) throw ValidationError("lag", "must be below the document length");
  return sum.value() / static_cast<double>(count);
}

}  // namespace lmfractal
