#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lmfractal {

/// Text shared by every plot. `stamp` becomes an XML comment; leave it empty
/// for byte-stable output.
struct PlotMeta {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::optional<std::string> stamp;
};

/// One series on a log-log fit plot. Points are (log scale, log value);
/// the fitted line is drawn when slope/intercept are given.
struct FitSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
  std::optional<std::pair<double, double>> line;  // slope, intercept
};

std::string fit_plot_svg(const PlotMeta& meta, const std::vector<FitSeries>& series);

/// Horizontal zero line, one bar per (label, value).
std::string bar_chart_svg(const PlotMeta& meta, const std::vector<std::pair<std::string, double>>& bars);

/// Strip plot: every sample at its x position plus a tick at the mean.
std::string distribution_svg(const PlotMeta& meta,
                             const std::vector<std::pair<double, std::vector<double>>>& groups);

/// Plain scatter with optional point labels.
std::string scatter_svg(const PlotMeta& meta, const std::vector<std::pair<double, double>>& points,
                        const std::vector<std::string>& labels = {});

}  // namespace lmfractal
