#include "lmfractal/analysis.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "lmfractal/errors.hpp"
#include "lmfractal/numeric.hpp"

namespace lmfractal {

SettingRow estimate_setting(const Corpus& corpus, const EstimationConfig& cfg) {
  if (corpus.empty()) throw EmptySelectionError("setting " + corpus.key.label() + " has no documents");
  SettingRow row;
  row.key = corpus.key;
  row.n_docs = corpus.size();

  std::vector<double> doc_means;
  CompensatedSum all;
  std::size_t count = 0;
  CompensatedSum quality;
  std::size_t rated = 0;
  for (const auto& d : corpus.documents) {
    doc_means.push_back(mean(d.scores));
    for (double v : d.scores) all.add(v);
    count += d.scores.size();
    if (d.quality_rating) {
      quality.add(*d.quality_rating);
      ++rated;
    }
  }
  row.mean_log_ppl = count ? all.value() / static_cast<double>(count) : 0.0;
  row.mean_log_ppl_se = sample_std(doc_means) / std::sqrt(static_cast<double>(doc_means.size()));
  if (rated) row.mean_quality = quality.value() / static_cast<double>(rated);

  auto series = corpus.series();
  auto run = [&](ExponentKind kind, std::optional<FractalEstimate>& slot, std::string& error) {
    try {
      slot = bootstrap(series, kind, cfg);
    } catch (const EstimationError& e) {
      error = e.what();
    } catch (const ValidationError& e) {
      error = e.what();
    }
  };
  run(ExponentKind::holder, row.holder, row.holder_error);
  run(ExponentKind::hurst, row.hurst, row.hurst_error);
  return row;
}

double log_ratio(double llm_value, double human_value) {
  if (!(llm_value > 0.0) || !(human_value > 0.0))
    throw ValidationError("log_ratio", "both values must be positive");
  return std::log(llm_value / human_value);
}

Corpus mix_corpora(const Corpus& human, const Corpus& llm, double ratio, std::size_t size,
                   std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw ValidationError("ratio", "must lie in [0, 1]");
  const auto n_llm = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(size)));
  const auto n_human = size - n_llm;
  if (n_llm > llm.size())
    throw ValidationError("size", "needs " + std::to_string(n_llm) + " LLM documents, only " +
                                      std::to_string(llm.size()) + " available");
  if (n_human > human.size())
    throw ValidationError("size", "needs " + std::to_string(n_human) + " human documents, only " +
                                      std::to_string(human.size()) + " available");

  std::mt19937_64 rng(seed);
  auto draw = [&rng](const Corpus& from, std::size_t k, std::vector<DocumentRecord>& into) {
    std::vector<std::size_t> idx(from.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates; the first k slots are the sample.
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      into.push_back(from.documents[idx[i]]);
    }
  };
  Corpus out;
  for (auto f : kKeyFields) {
    const auto& a = human.key.get(f);
    if (a && a == llm.key.get(f)) out.key.set(f, a);
  }
  draw(llm, n_llm, out.documents);
  draw(human, n_human, out.documents);
  if (!out.documents.empty()) {
    auto len = out.documents.front().scores.size();
    for (const auto& d : out.documents)
      if (d.scores.size() != len)
        throw ValidationError("corpus", "mixed corpora must share one document length");
  }
  return out;
}

std::vector<long long> bin_values(std::span<const double> values, double width) {
  if (!(width > 0.0)) throw ValidationError("width", "must be > 0");
  std::vector<long long> out;
  out.reserve(values.size());
  for (double v : values) {
    if (!std::isfinite(v)) throw ValidationError("values", "must be finite");
    double q = v / width;
    double nearest = std::round(q);
    // Values sitting on a boundary up to division rounding go to the upper bin.
    double k = std::abs(q - nearest) < 1e-9 ? nearest : std::floor(q);
    out.push_back(static_cast<long long>(k));
  }
  return out;
}

Labels to_labels(std::span<const long long> bins) {
  Labels out;
  out.reserve(bins.size());
  for (auto b : bins) out.push_back(std::to_string(b));
  return out;
}

namespace {

double entropy_of_counts(const std::map<std::string, std::size_t>& counts, std::size_t total) {
  CompensatedSum h;
  for (const auto& [label, c] : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    h.add(-p * std::log(p));
  }
  return h.value();
}

std::string join_key(const std::vector<const Labels*>& cols, std::size_t i) {
  std::string key;
  for (const auto* c : cols) {
    key += (*c)[i];
    key += '\x1f';
  }
  return key;
}

}  // namespace

double entropy(const Labels& xs) {
  if (xs.empty()) throw ValidationError("labels", "must be non-empty");
  std::map<std::string, std::size_t> counts;
  for (const auto& x : xs) ++counts[x];
  return entropy_of_counts(counts, xs.size());
}

MutualInformation mutual_information(const Labels& xs, const Labels& ys) {
  if (xs.empty() || ys.empty()) throw ValidationError("labels", "must be non-empty");
  if (xs.size() != ys.size()) throw ValidationError("labels", "vectors must have equal length");
  const auto n = static_cast<double>(xs.size());
  std::map<std::string, std::size_t> cx;
  std::map<std::string, std::size_t> cy;
  std::map<std::pair<std::string, std::string>, std::size_t> cxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    ++cx[xs[i]];
    ++cy[ys[i]];
    ++cxy[{xs[i], ys[i]}];
  }
  CompensatedSum mi;
  for (const auto& [xy, c] : cxy) {
    double pxy = static_cast<double>(c) / n;
    double px = static_cast<double>(cx[xy.first]) / n;
    double py = static_cast<double>(cy[xy.second]) / n;
    mi.add(pxy * std::log(pxy / (px * py)));
  }
  MutualInformation out;
  out.mi_nats = std::max(0.0, mi.value());
  double hx = entropy_of_counts(cx, xs.size());
  if (!(hx > 0.0)) throw ValidationError("xs", "entropy is zero; normalized MI is undefined");
  out.normalized = out.mi_nats / hx;
  return out;
}

PearsonResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ValidationError("pearson", "inputs must have equal length");
  if (xs.size() < 3) throw ValidationError("pearson", "needs at least 3 pairs");
  double mx = mean(xs);
  double my = mean(ys);
  CompensatedSum sxx;
  CompensatedSum syy;
  CompensatedSum sxy;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx;
    double dy = ys[i] - my;
    sxx.add(dx * dx);
    syy.add(dy * dy);
    sxy.add(dx * dy);
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0))
    throw ValidationError("pearson", "zero variance");
  PearsonResult out;
  out.r = std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
  const double dof = static_cast<double>(xs.size() - 2);
  if (std::abs(out.r) >= 1.0) {
    out.p_value = 0.0;
  } else {
    double t = out.r * std::sqrt(dof / (1.0 - out.r * out.r));
    boost::math::students_t dist(dof);
    out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  }
  return out;
}

std::optional<double> row_metric(const SettingRow& row, RowMetric m) {
  switch (m) {
    case RowMetric::holder:
      return row.holder ? std::optional<double>(row.holder->point) : std::nullopt;
    case RowMetric::hurst:
      return row.hurst ? std::optional<double>(row.hurst->point) : std::nullopt;
    case RowMetric::mean_log_ppl: return row.mean_log_ppl;
    case RowMetric::mean_quality: return row.mean_quality;
  }
  return std::nullopt;
}

AnalysisTable group_dispersion(const std::vector<SettingRow>& rows, KeyField vary,
                               const std::vector<KeyField>& fix) {
  AnalysisTable table;
  for (auto [metric, stat] : {std::pair{RowMetric::holder, "dispersion_holder"},
                              std::pair{RowMetric::hurst, "dispersion_hurst"}}) {
    // group -> vary level -> values
    std::map<CorpusKey, std::map<std::string, std::vector<double>>> groups;
    for (const auto& r : rows) {
      auto v = row_metric(r, metric);
      auto level = r.key.get(vary);
      if (!v || !level) continue;
      groups[project_key(r.key, fix)][*level].push_back(*v);
    }
    for (const auto& [gkey, levels] : groups) {
      std::vector<double> level_means;
      for (const auto& [level, vals] : levels) level_means.push_back(mean(vals));
      table.add(gkey.label(), stat, population_std(level_means), std::nullopt, level_means.size());
    }
  }
  return table;
}

double conditional_entropy(const Labels& target, const std::vector<Labels>& conditioning) {
  if (target.empty()) throw ValidationError("target", "must be non-empty");
  std::vector<const Labels*> cols;
  for (const auto& c : conditioning) {
    if (c.size() != target.size()) throw ValidationError("conditioning", "column length mismatch");
    cols.push_back(&c);
  }
  // z -> (x -> count)
  std::map<std::string, std::map<std::string, std::size_t>> cells;
  for (std::size_t i = 0; i < target.size(); ++i) ++cells[join_key(cols, i)][target[i]];
  const auto n = static_cast<double>(target.size());
  CompensatedSum h;
  for (const auto& [z, counts] : cells) {
    std::size_t nz = 0;
    for (const auto& [x, c] : counts) nz += c;
    h.add(static_cast<double>(nz) / n * entropy_of_counts(counts, nz));
  }
  return h.value();
}

UncertaintyReport uncertainty_reduction(const Labels& target, const std::vector<Labels>& z,
                                        const Labels& y) {
  UncertaintyReport rep;
  rep.u_without = conditional_entropy(target, z);
  auto zy = z;
  zy.push_back(y);
  rep.u_with = conditional_entropy(target, zy);
  rep.reduction = rep.u_without - rep.u_with;
  return rep;
}

QualityReport quality_table(const std::vector<SettingRow>& rows) {
  QualityReport rep;
  std::vector<const SettingRow*> rated;
  for (const auto& r : rows)
    if (r.mean_quality) rated.push_back(&r);
  for (const auto* r : rated) {
    auto g = r->key.label();
    rep.table.add(g, "mean_quality", *r->mean_quality, std::nullopt, r->n_docs);
    rep.table.add(g, "mean_log_ppl", r->mean_log_ppl, r->mean_log_ppl_se, r->n_docs);
    if (r->holder) rep.table.add(g, "holder", r->holder->point, r->holder->boot_std, r->n_docs);
    if (r->hurst) rep.table.add(g, "hurst", r->hurst->point, r->hurst->boot_std, r->n_docs);
  }
  for (auto [metric, name] : {std::pair{RowMetric::mean_log_ppl, "mean_log_ppl"},
                              std::pair{RowMetric::holder, "holder"},
                              std::pair{RowMetric::hurst, "hurst"}}) {
    std::vector<double> q;
    std::vector<double> m;
    for (const auto* r : rated) {
      if (auto v = row_metric(*r, metric)) {
        q.push_back(*r->mean_quality);
        m.push_back(*v);
      }
    }
    QualityCorrelation corr;
    corr.metric = name;
    corr.n = q.size();
    if (q.size() >= 3) {
      bool flat = population_std(q) == 0.0 || population_std(m) == 0.0;
      if (flat) {
        corr.zero_variance = true;
      } else {
        corr.result = pearson(q, m);
        auto group = std::string("quality~") + name;
        rep.table.add(group, "pearson_r", corr.result->r, std::nullopt, q.size());
        rep.table.add(group, "pearson_p", corr.result->p_value, std::nullopt, q.size());
      }
    }
    rep.correlations.push_back(corr);
  }
  return rep;
}

AnalysisTable settings_table(const std::vector<SettingRow>& rows) {
  AnalysisTable t;
  for (const auto& r : rows) {
    auto g = r.key.label();
    t.add(g, "n_docs", static_cast<double>(r.n_docs), std::nullopt, r.n_docs);
    t.add(g, "mean_log_ppl", r.mean_log_ppl, r.mean_log_ppl_se, r.n_docs);
    if (r.mean_quality) t.add(g, "mean_quality", *r.mean_quality, std::nullopt, r.n_docs);
    if (r.holder) {
      t.add(g, "holder", r.holder->point, r.holder->boot_std, r.n_docs);
      t.add(g, "holder_boot_mean", r.holder->boot_mean, std::nullopt, r.n_docs);
      t.add(g, "holder_boot_std", r.holder->boot_std, std::nullopt, r.n_docs);
      t.add(g, "holder_r2", r.holder->fit.r_squared, std::nullopt, r.n_docs);
    }
    if (r.hurst) {
      t.add(g, "hurst", r.hurst->point, r.hurst->boot_std, r.n_docs);
      t.add(g, "hurst_boot_mean", r.hurst->boot_mean, std::nullopt, r.n_docs);
      t.add(g, "hurst_boot_std", r.hurst->boot_std, std::nullopt, r.n_docs);
      t.add(g, "hurst_r2", r.hurst->fit.r_squared, std::nullopt, r.n_docs);
    }
  }
  return t;
}

AnalysisTable compare_rows(const SettingRow& llm, const SettingRow& human) {
  AnalysisTable t;
  auto g = llm.key.label();
  auto rel = [](double se, double v) { return se / v; };
  if (llm.mean_log_ppl > 0.0 && human.mean_log_ppl > 0.0) {
    double se = std::hypot(rel(llm.mean_log_ppl_se, llm.mean_log_ppl),
                           rel(human.mean_log_ppl_se, human.mean_log_ppl));
    t.add(g, "log_ratio_log_ppl", log_ratio(llm.mean_log_ppl, human.mean_log_ppl), se, llm.n_docs);
  }
  auto add_exponent = [&](const std::optional<FractalEstimate>& a, const std::optional<FractalEstimate>& b,
                          const char* stat) {
    if (!a || !b || !(a->point > 0.0) || !(b->point > 0.0)) return;
    double se = std::hypot(rel(a->boot_std, a->point), rel(b->boot_std, b->point));
    t.add(g, stat, log_ratio(a->point, b->point), se, llm.n_docs);
  };
  add_exponent(llm.holder, human.holder, "log_ratio_holder");
  add_exponent(llm.hurst, human.hurst, "log_ratio_hurst");
  return t;
}

AnalysisTable aggregate_log_ratios(const std::vector<std::pair<CorpusKey, AnalysisTable>>& per_setting,
                                   KeyField field) {
  // (group label, statistic) -> values
  std::map<std::pair<std::string, std::string>, std::vector<double>> buckets;
  for (const auto& [key, table] : per_setting) {
    CorpusKey g;
    g.set(field, key.get(field));
    for (const auto& row : table.rows()) {
      if (row.statistic.rfind("log_ratio_", 0) != 0) continue;
      buckets[{g.label(), "mean_" + row.statistic}].push_back(row.value);
    }
  }
  AnalysisTable out;
  for (const auto& [k, vals] : buckets)
    out.add(k.first, k.second, mean(vals), population_std(vals), vals.size());
  return out;
}

AnalysisTable mi_table(const std::vector<SettingRow>& rows, ExponentKind target,
                       const std::vector<KeyField>& vars, double bin_width) {
  std::vector<double> values;
  std::vector<const SettingRow*> owner;
  for (const auto& r : rows) {
    const auto& est = target == ExponentKind::holder ? r.holder : r.hurst;
    if (!est) continue;
    if (est->resamples.empty()) {
      values.push_back(est->point);
      owner.push_back(&r);
    } else {
      for (double v : est->resamples) {
        values.push_back(v);
        owner.push_back(&r);
      }
    }
  }
  AnalysisTable out;
  if (values.empty()) return out;
  auto xs = to_labels(bin_values(values, bin_width));
  for (auto var : vars) {
    Labels ys;
    for (const auto* r : owner) ys.push_back(r->key.get(var).value_or("<none>"));
    auto g = std::string(to_string(var)) + "|" + std::string(to_string(target));
    double hx = entropy(xs);
    if (!(hx > 0.0)) {
      out.add(g, "mi_nats", 0.0, std::nullopt, xs.size());
      continue;
    }
    auto mi = mutual_information(xs, ys);
    out.add(g, "mi_nats", mi.mi_nats, std::nullopt, xs.size());
    out.add(g, "mi_normalized", mi.normalized, std::nullopt, xs.size());
  }
  return out;
}

}  // namespace lmfractal
