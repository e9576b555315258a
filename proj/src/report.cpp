#include "lmfractal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lmfractal/numeric.hpp"

namespace lmfractal {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 60;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void include(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // Pads degenerate or empty ranges so the mapping stays finite.
  void settle() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

class Canvas {
 public:
  Canvas(const PlotMeta& meta, Range x, Range y) : x_(x), y_(y) {
    x_.settle();
    y_.settle();
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    if (meta.stamp) out_ << "<!-- generated " << xml_escape(*meta.stamp) << " -->\n";
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
         << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
         << xml_escape(meta.title) << "</text>\n";
    axes(meta);
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y_.lo) / (y_.hi - y_.lo) * (kHeight - kTop - kBottom); }
  const Range& xr() const { return x_; }
  const Range& yr() const { return y_; }

  std::ostringstream& body() { return out_; }

  void circle(double x, double y, const char* color, double r = 3.0) {
    out_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << r << "\" fill=\"" << color
         << "\" fill-opacity=\"0.7\"/>\n";
  }
  void line(double x0, double y0, double x1, double y1, const char* color, double w = 1.5) {
    out_ << "<line x1=\"" << fmt(px(x0)) << "\" y1=\"" << fmt(py(y0)) << "\" x2=\"" << fmt(px(x1)) << "\" y2=\""
         << fmt(py(y1)) << "\" stroke=\"" << color << "\" stroke-width=\"" << w << "\"/>\n";
  }
  void legend(std::size_t i, const std::string& label, const char* color) {
    double y = kTop + 14.0 * static_cast<double>(i);
    out_ << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << fmt(y - 8) << "\" width=\"8\" height=\"8\" fill=\""
         << color << "\"/>\n";
    out_ << "<text x=\"" << kWidth - kRight - 138 << "\" y=\"" << fmt(y) << "\">" << xml_escape(label) << "</text>\n";
  }

  std::string finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  void axes(const PlotMeta& meta) {
    double x0 = kLeft;
    double x1 = kWidth - kRight;
    double y0 = kHeight - kBottom;
    double y1 = kTop;
    out_ << "<g stroke=\"black\" stroke-width=\"1\">\n";
    out_ << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x1 << "\" y2=\"" << y0 << "\"/>\n";
    out_ << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 << "\" y2=\"" << y1 << "\"/>\n";
    out_ << "</g>\n";
    for (int i = 0; i <= 4; ++i) {
      double fx = x_.lo + (x_.hi - x_.lo) * i / 4.0;
      double fy = y_.lo + (y_.hi - y_.lo) * i / 4.0;
      out_ << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << y0 + 16 << "\" text-anchor=\"middle\">" << tick(fx)
           << "</text>\n";
      out_ << "<text x=\"" << x0 - 6 << "\" y=\"" << fmt(py(fy) + 4) << "\" text-anchor=\"end\">" << tick(fy)
           << "</text>\n";
    }
    out_ << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\">"
         << xml_escape(meta.x_label) << "</text>\n";
    out_ << "<text x=\"16\" y=\"" << (y0 + y1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
         << (y0 + y1) / 2 << ")\">" << xml_escape(meta.y_label) << "</text>\n";
  }

  Range x_;
  Range y_;
  std::ostringstream out_;
};

const char* color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

}  // namespace

std::string fit_plot_svg(const PlotMeta& meta, const std::vector<FitSeries>& series) {
  Range x;
  Range y;
  for (const auto& s : series)
    for (auto [a, b] : s.points) {
      x.include(a);
      y.include(b);
    }
  Canvas c(meta, x, y);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    for (auto [a, b] : s.points) c.circle(a, b, color(i));
    if (s.line && !s.points.empty()) {
      auto [lo, hi] = std::minmax_element(s.points.begin(), s.points.end());
      auto [slope, icept] = *s.line;
      c.line(lo->first, icept + slope * lo->first, hi->first, icept + slope * hi->first, color(i));
    }
    c.legend(i, s.label, color(i));
  }
  return c.finish();
}

std::string bar_chart_svg(const PlotMeta& meta, const std::vector<std::pair<std::string, double>>& bars) {
  Range x;
  x.include(-0.5);
  x.include(static_cast<double>(bars.size()) - 0.5);
  Range y;
  y.include(0.0);
  for (const auto& b : bars) y.include(b.second);
  Canvas c(meta, x, y);
  c.line(c.xr().lo, 0.0, c.xr().hi, 0.0, "#666666", 1.0);
  double slot = c.px(1.0) - c.px(0.0);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    double v = std::isfinite(bars[i].second) ? bars[i].second : 0.0;
    double cx = c.px(static_cast<double>(i));
    double top = c.py(std::max(v, 0.0));
    double h = std::abs(c.py(v) - c.py(0.0));
    c.body() << "<rect x=\"" << fmt(cx - 0.35 * slot) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(0.7 * slot)
             << "\" height=\"" << fmt(h) << "\" fill=\"" << (v < 0 ? color(1) : color(0)) << "\"/>\n";
    c.body() << "<text x=\"" << fmt(cx) << "\" y=\"" << kHeight - kBottom + 30
             << "\" text-anchor=\"middle\" font-size=\"9\">" << xml_escape(bars[i].first) << "</text>\n";
  }
  return c.finish();
}

std::string distribution_svg(const PlotMeta& meta,
                             const std::vector<std::pair<double, std::vector<double>>>& groups) {
  Range x;
  Range y;
  for (const auto& [pos, vals] : groups) {
    x.include(pos);
    for (double v : vals) y.include(v);
  }
  Canvas c(meta, x, y);
  double half = 0.02 * (c.xr().hi - c.xr().lo);
  for (const auto& [pos, vals] : groups) {
    for (double v : vals) c.circle(pos, v, color(0), 2.5);
    if (!vals.empty()) {
      double m = mean(vals);
      c.line(pos - half, m, pos + half, m, color(1), 2.0);
    }
  }
  return c.finish();
}

std::string scatter_svg(const PlotMeta& meta, const std::vector<std::pair<double, double>>& points,
                        const std::vector<std::string>& labels) {
  Range x;
  Range y;
  for (auto [a, b] : points) {
    x.include(a);
    y.include(b);
  }
  Canvas c(meta, x, y);
  for (std::size_t i = 0; i < points.size(); ++i) {
    c.circle(points[i].first, points[i].second, color(0), 3.5);
    if (i < labels.size())
      c.body() << "<text x=\"" << fmt(c.px(points[i].first) + 5) << "\" y=\"" << fmt(c.py(points[i].second) - 4)
               << "\" font-size=\"8\">" << xml_escape(labels[i]) << "</text>\n";
  }
  return c.finish();
}

}  // namespace lmfractal
