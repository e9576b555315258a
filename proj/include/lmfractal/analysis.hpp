#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmfractal/fractal.hpp"
#include "lmfractal/record.hpp"
#include "lmfractal/table.hpp"

namespace lmfractal {

using Labels = std::vector<std::string>;

/// Per-setting summary shared by every comparative report.
struct SettingRow {
  CorpusKey key;
  std::size_t n_docs = 0;
  double mean_log_ppl = 0.0;
  double mean_log_ppl_se = 0.0;  // standard error over per-document means
  std::optional<double> mean_quality;
  std::optional<FractalEstimate> holder;
  std::optional<FractalEstimate> hurst;
  std::string holder_error;  // estimator failure message when holder is absent
  std::string hurst_error;
};

/// Bootstrapped S and H plus score and quality means for one preprocessed
/// corpus. Estimator failures are stored on the row instead of thrown.
SettingRow estimate_setting(const Corpus& corpus, const EstimationConfig& cfg);

/// Natural log of llm_value / human_value; both must be positive.
double log_ratio(double llm_value, double human_value);

/// round(ratio * size) documents drawn without replacement from `llm`,
/// the rest from `human`. Deterministic given seed.
Corpus mix_corpora(const Corpus& human, const Corpus& llm, double ratio, std::size_t size,
                   std::uint64_t seed);

/// Bin index k with value in [k * width, (k + 1) * width).
std::vector<long long> bin_values(std::span<const double> values, double width = 0.1);
Labels to_labels(std::span<const long long> bins);

/// Plug-in Shannon entropy in nats.
double entropy(const Labels& xs);

struct MutualInformation {
  double mi_nats = 0.0;
  double normalized = 0.0;  // mi / entropy(xs)
};

/// Plug-in mutual information of two label vectors. Throws ValidationError
/// on empty or mismatched input, or when entropy(xs) is zero.
MutualInformation mutual_information(const Labels& xs, const Labels& ys);

struct PearsonResult {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, via the t distribution with n - 2 dof
};

/// Needs >= 3 pairs and nonzero variance on both sides (ValidationError).
PearsonResult pearson(std::span<const double> xs, std::span<const double> ys);

/// Metric taken from a setting row.
enum class RowMetric { holder, hurst, mean_log_ppl, mean_quality };
std::optional<double> row_metric(const SettingRow& row, RowMetric m);

/// Rows are grouped by the `fix` fields. Inside a group, the metric is
/// averaged per level of `vary` and the population standard deviation of
/// those level means is reported (dispersion_holder, dispersion_hurst).
AnalysisTable group_dispersion(const std::vector<SettingRow>& rows, KeyField vary,
                               const std::vector<KeyField>& fix);

struct UncertaintyReport {
  std::string target;
  std::vector<std::string> conditioning;
  double u_without = 0.0;  // H(X | Z), nats
  double u_with = 0.0;     // H(X | Z, Y), nats
  double reduction = 0.0;
};

/// Empirical conditional entropy H(X | cols), nats. No columns means H(X).
double conditional_entropy(const Labels& target, const std::vector<Labels>& conditioning);

UncertaintyReport uncertainty_reduction(const Labels& target, const std::vector<Labels>& z,
                                        const Labels& y);

struct QualityCorrelation {
  std::string metric;  // mean_log_ppl, holder or hurst
  std::optional<PearsonResult> result;
  bool zero_variance = false;
  std::size_t n = 0;
};

struct QualityReport {
  AnalysisTable table;
  std::vector<QualityCorrelation> correlations;
};

/// Per-setting (mean_quality, mean_log_ppl, S, H) rows plus the Pearson
/// correlation of quality with each metric. Rows without quality are skipped.
QualityReport quality_table(const std::vector<SettingRow>& rows);

/// Setting rows as long-format statistics.
AnalysisTable settings_table(const std::vector<SettingRow>& rows);

/// Log-ratios of mean log-PPL, S and H for one LLM setting against its
/// human reference. Missing estimates are skipped.
AnalysisTable compare_rows(const SettingRow& llm, const SettingRow& human);

/// Mean and standard deviation across settings of every log_ratio_*
/// statistic, grouped by `field` of the LLM key (mean_log_ratio_*).
AnalysisTable aggregate_log_ratios(const std::vector<std::pair<CorpusKey, AnalysisTable>>& per_setting,
                                   KeyField field);

/// Normalized mutual information between binned S or H and each variable.
/// Each setting contributes its bootstrap replicates (or its point estimate
/// when there are none) as samples.
AnalysisTable mi_table(const std::vector<SettingRow>& rows, ExponentKind target,
                       const std::vector<KeyField>& vars, double bin_width = 0.1);

}  // namespace lmfractal
