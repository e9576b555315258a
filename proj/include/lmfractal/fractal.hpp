#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace lmfractal {

using Series = std::vector<double>;

enum class ExponentKind { holder, hurst };
std::string_view to_string(ExponentKind k);

/// How scores are brought to unit scale before the Hölder mass count.
enum class StandardizeMode { corpus, document };
std::string_view to_string(StandardizeMode m);
std::optional<StandardizeMode> parse_standardize_mode(std::string_view s);

inline const std::vector<int> kDefaultScales = {8, 16, 32, 48, 64, 96, 128, 160, 192, 256, 320};

struct EstimationConfig {
  std::vector<int> scales = kDefaultScales;
  double epsilon = 1e-2;
  std::size_t bootstrap_samples = 10;
  std::uint64_t rng_seed = 0;
  StandardizeMode standardize = StandardizeMode::corpus;

  /// Throws ValidationError: needs >= 3 strictly increasing positive
  /// scales, epsilon > 0 and at least one bootstrap sample.
  void validate() const;
  /// validate() plus max(scales) < length.
  void validate_for_length(std::size_t length) const;
};

/// Fraction of τ-windows whose integral-process increment is within ε.
struct ScaleMassPoint {
  int tau = 0;
  double mass = 0.0;
  std::size_t hit_count = 0;
  std::size_t window_count = 0;
};

/// Mean rescaled range at prefix length n over non-degenerate documents.
struct RescaledRangePoint {
  int n = 0;
  double mean_ratio = 0.0;
  std::size_t block_count = 0;
};

/// OLS line through (log scale, log value). `slope` is the raw fitted slope;
/// the Hölder estimator reports its negation.
struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;
};

struct FractalEstimate {
  ExponentKind kind = ExponentKind::holder;
  double point = 0.0;
  double boot_mean = 0.0;
  double boot_std = 0.0;
  PowerLawFit fit;
  std::size_t n_documents = 0;
  std::vector<double> resamples;  // successful bootstrap estimates, in resample order
  std::size_t failed_resamples = 0;
  std::vector<ScaleMassPoint> mass_points;      // holder only, every scale
  std::vector<RescaledRangePoint> rs_points;    // hurst only, surviving scales

  bool operator==(const FractalEstimate&) const;
};

/// Affine map to zero mean and unit population variance, pooled over the
/// corpus (or per document). All documents must have equal length.
/// Throws DegenerateCorpusError on zero variance.
std::vector<Series> standardize_corpus(std::span<const Series> corpus,
                                       StandardizeMode mode = StandardizeMode::corpus);

/// X[0] = 0, X[t] = X[t-1] + x[t-1]; length |x| + 1.
Series integral_process(std::span<const double> x);

/// Pooled over documents and window starts t in 0..L-tau of each integral
/// process. Documents shorter than tau contribute no windows.
ScaleMassPoint holder_mass(std::span<const Series> corpus_std, int tau, double epsilon);

/// Standardizes, computes the mass at every scale, drops zero-mass scales
/// and fits log mass against log tau. S is the negated slope.
/// Throws InsufficientScalesError when fewer than three scales survive.
FractalEstimate estimate_holder(std::span<const Series> corpus, const EstimationConfig& cfg);

/// R(n)/S(n) on the length-n prefix of x, with running-mean adjusted
/// increments y_t = x_t - mean(x_1..x_t) and population S(n).
/// Returns nullopt when the prefix has zero variance.
std::optional<double> rs_statistic(std::span<const double> x, std::size_t n);

/// Averages rs_statistic over documents at every scale and fits
/// log mean ratio against log n. H is the slope.
FractalEstimate estimate_hurst(std::span<const Series> corpus, const EstimationConfig& cfg);

/// Unweighted OLS in log-log space. Needs >= 3 points with positive
/// coordinates. A zero-variance response has r_squared = 1.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

FractalEstimate estimate(std::span<const Series> corpus, ExponentKind kind,
                         const EstimationConfig& cfg);

/// Point estimate on the full corpus plus `bootstrap_samples` document
/// resamples drawn with replacement. Resample i draws from a generator
/// seeded by (rng_seed, i), so results are reproducible bit for bit.
/// Failed resamples are counted; more than half failing is a BootstrapError.
FractalEstimate bootstrap(std::span<const Series> corpus, ExponentKind kind,
                          const EstimationConfig& cfg);

/// Pooled mean of x[t + lag] * x[t] over documents and valid t.
double autocorrelation(std::span<const Series> corpus_std, std::size_t lag);

/// 64-bit seed for stream `index` derived from `seed` (splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace lmfractal
