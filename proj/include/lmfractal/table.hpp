#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmfractal {

/// Statistic names that may appear in an AnalysisTable.
inline constexpr std::array<std::string_view, 30> kStatisticRegistry = {
    "n_docs",
    "mean_log_ppl",
    "mean_quality",
    "holder",
    "holder_boot_mean",
    "holder_boot_std",
    "holder_r2",
    "hurst",
    "hurst_boot_mean",
    "hurst_boot_std",
    "hurst_r2",
    "log_ratio_log_ppl",
    "log_ratio_holder",
    "log_ratio_hurst",
    "mean_log_ratio_log_ppl",
    "mean_log_ratio_holder",
    "mean_log_ratio_hurst",
    "unpaired_dropped",
    "mix_holder",
    "mix_hurst",
    "mi_nats",
    "mi_normalized",
    "pearson_r",
    "pearson_p",
    "dispersion_holder",
    "dispersion_hurst",
    "u_without",
    "u_with",
    "uncertainty_reduction",
    "autocorrelation",
};

bool is_registered_statistic(std::string_view name);

struct TableRow {
  std::string group;
  std::string statistic;
  double value = 0.0;
  std::optional<double> stderr_value;
  std::size_t n = 0;

  bool operator==(const TableRow&) const = default;
};

/// Long-format statistics table: one row per (group, statistic).
class AnalysisTable {
 public:
  /// Throws ValidationError when `statistic` is not registered.
  void add(std::string group, std::string_view statistic, double value,
           std::optional<double> stderr_value, std::size_t n);
  void append(const AnalysisTable& other);

  const std::vector<TableRow>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  /// First row matching group and statistic, if any.
  const TableRow* find(std::string_view group, std::string_view statistic) const;

  /// CSV with columns group_key,statistic,value,stderr,n_docs.
  std::string to_csv() const;

 private:
  std::vector<TableRow> rows_;
};

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);
/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> csv_split(std::string_view line);

}  // namespace lmfractal
