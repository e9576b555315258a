#include "lmfractal/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "lmfractal/errors.hpp"
#include "lmfractal/ingest.hpp"
#include "lmfractal/numeric.hpp"
#include "lmfractal/preprocess.hpp"
#include "lmfractal/report.hpp"
#include "lmfractal/synth.hpp"

#ifndef LMFRACTAL_VERSION
#define LMFRACTAL_VERSION "dev"
#endif

namespace lmfractal {
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------- config file

// JSON config: top-level keys are global flags, nested objects are
// per-command sections ({"estimate": {"store": "x.jsonl"}}).
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const auto* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const auto& name = opt->get_lnames().front();
      if (opt->count() > 0)
        j[name] = opt->reduced_results().size() == 1 ? json(opt->reduced_results().front())
                                                     : json(opt->reduced_results());
      else if (default_also && !opt->get_default_str().empty())
        j[name] = opt->get_default_str();
    }
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config", std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    walk(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config", "unsupported value " + v.dump());
  }

  static void walk(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        walk(value, p, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(value));
      items.push_back(std::move(item));
    }
  }
};

// ------------------------------------------------------------------- options

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::vector<int> scales = kDefaultScales;
  double epsilon = 1e-2;
  std::size_t boot = 10;
  std::size_t warmup = 64;
  std::size_t min_len = 400;
  std::size_t clip_len = 400;
  std::string standardize = "corpus";
  bool deterministic = false;
  std::string out = ".";
};

struct IngestOptions {
  std::vector<std::string> inputs;
  std::string format = "canonical";
  bool strict = false;
};

struct SynthOptions {
  std::string process = "fgn";
  double hurst = 0.5;
  std::size_t period = 8;
  double noise = 0.0;
  std::size_t docs = 500;
  std::size_t len = 400;
};

struct EstimateOptions {
  std::string store;
  std::vector<std::string> filter;
  std::vector<std::string> group_by;
};

struct CompareOptions {
  std::string store;
  std::vector<std::string> llm;
  std::vector<std::string> human;
  std::string by = "domain";
};

struct MixOptions {
  std::string store;
  std::vector<std::string> llm;
  std::vector<std::string> human;
  std::vector<double> ratios = {0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t size = 100;
  std::vector<std::uint64_t> seeds;
  double bin_width = 0.1;
};

struct MiOptions {
  std::string settings;
  std::string target = "h";
  std::vector<std::string> vars = {"prompt_method", "generator_model", "temperature", "domain"};
  double bin_width = 0.1;
  std::string uncertainty;
};

struct QualityOptions {
  std::string settings;
};

struct ReportOptions {
  std::string settings;
  std::string diagnostics;
  std::string vary;
  std::vector<std::string> fix;
};

// ------------------------------------------------------------------- helpers

struct Context {
  GlobalOptions g;
  std::ostream& out;
  std::ostream& err;
  std::string command;
  json config_snapshot;
};

EstimationConfig estimation_config(const GlobalOptions& g) {
  EstimationConfig cfg;
  cfg.scales = g.scales;
  cfg.epsilon = g.epsilon;
  cfg.bootstrap_samples = g.boot;
  cfg.rng_seed = g.seed;
  auto mode = parse_standardize_mode(g.standardize);
  if (!mode) throw ValidationError("standardize", "expected corpus or document, got '" + g.standardize + "'");
  cfg.standardize = *mode;
  cfg.validate();
  cfg.validate_for_length(g.clip_len);
  return cfg;
}

PreprocessConfig preprocess_config(const GlobalOptions& g) {
  PreprocessConfig cfg{.warmup_tokens = g.warmup, .min_length = g.min_len, .clip_length = g.clip_len};
  cfg.validate();
  return cfg;
}

std::optional<std::string> stamp(const GlobalOptions& g) {
  if (g.deterministic) return std::nullopt;
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

fs::path output_dir(const GlobalOptions& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_manifest(const Context& ctx, const fs::path& dir, const std::vector<fs::path>& inputs) {
  json m;
  m["command"] = ctx.command;
  m["toolkit_version"] = LMFRACTAL_VERSION;
  m["rng_seed"] = ctx.g.seed;
  m["config"] = ctx.config_snapshot;
  json digests = json::array();
  for (const auto& p : inputs) digests.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  m["inputs"] = digests;
  auto ts = stamp(ctx.g);
  m["timestamp"] = ts ? json(*ts) : json(nullptr);
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

std::vector<KeyField> parse_fields(const std::vector<std::string>& names) {
  std::vector<KeyField> out;
  for (const auto& n : names) {
    auto f = parse_key_field(n);
    if (!f) throw ValidationError("field", "unknown key field '" + n + "'");
    out.push_back(*f);
  }
  return out;
}

KeyField parse_field(const std::string& name) { return parse_fields({name}).front(); }

// Records matching `filter`; EmptySelectionError lists every key present.
std::vector<DocumentRecord> select(const std::vector<DocumentRecord>& records, const Filter& filter,
                                   const std::string& what) {
  std::vector<DocumentRecord> out;
  std::set<CorpusKey> seen;
  for (const auto& r : records) {
    if (filter.matches(r))
      out.push_back(r);
    else
      seen.insert(full_key(r));
  }
  if (out.empty()) {
    std::vector<std::string> available;
    for (const auto& k : seen) available.push_back(k.label());
    throw EmptySelectionError(what + " selection " + filter.key().label() + " matches no documents",
                              std::move(available));
  }
  return out;
}

Filter with_source(const std::vector<std::string>& terms, Source s) {
  auto f = Filter::parse(terms);
  bool has = false;
  for (const auto& [field, v] : f.terms()) has |= field == KeyField::source;
  if (!has) f.add(KeyField::source, std::string(to_string(s)));
  return f;
}

std::vector<DocumentRecord> read_store(const std::string& store) {
  auto loaded = read_records(store, InputFormat::canonical, true);
  std::set<std::string> ids;
  for (const auto& r : loaded.records)
    if (!ids.insert(r.id).second) throw ValidationError("id", "duplicate id '" + r.id + "' in " + store);
  return std::move(loaded.records);
}

SettingRow estimate_or_note(const Corpus& c, const EstimationConfig& cfg) {
  if (!c.empty()) return estimate_setting(c, cfg);
  SettingRow row;
  row.key = c.key;
  row.holder_error = row.hurst_error = "no document survives preprocessing";
  return row;
}

std::vector<FitSeries> fit_series(const std::vector<SettingRow>& rows, ExponentKind kind) {
  std::vector<FitSeries> out;
  for (const auto& r : rows) {
    const auto& est = kind == ExponentKind::holder ? r.holder : r.hurst;
    if (!est) continue;
    out.push_back({r.key.label(), est->fit.points, std::pair{est->fit.slope, est->fit.intercept}});
  }
  return out;
}

void write_fit_plots(const Context& ctx, const fs::path& dir, const std::vector<FitSeries>& holder,
                     const std::vector<FitSeries>& hurst) {
  auto ts = stamp(ctx.g);
  write_text_file(dir / "fit_holder.svg",
                  fit_plot_svg({"Holder fit", "log tau", "log mass", ts}, holder));
  write_text_file(dir / "fit_hurst.svg", fit_plot_svg({"Hurst fit", "log n", "log R/S", ts}, hurst));
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void report_row_errors(const Context& ctx, const std::vector<SettingRow>& rows) {
  for (const auto& r : rows) {
    if (!r.holder_error.empty()) ctx.err << "warning: " << r.key.label() << ": holder: " << r.holder_error << "\n";
    if (!r.hurst_error.empty()) ctx.err << "warning: " << r.key.label() << ": hurst: " << r.hurst_error << "\n";
  }
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "-"; }

// ------------------------------------------------------------------ commands

int cmd_ingest(Context& ctx, const IngestOptions& o) {
  auto format = o.format == "gagle" ? InputFormat::gagle : InputFormat::canonical;
  if (o.format != "gagle" && o.format != "canonical")
    throw ValidationError("format", "expected gagle or canonical, got '" + o.format + "'");
  auto dir = output_dir(ctx.g);
  std::vector<DocumentRecord> all;
  std::set<std::string> ids;
  std::string summary = "input,counter,value\n";
  std::vector<fs::path> inputs;
  for (const auto& in : o.inputs) {
    inputs.emplace_back(in);
    auto loaded = read_records(in, format, o.strict);
    auto& s = loaded.summary;
    for (auto& r : loaded.records) {
      if (!ids.insert(r.id).second) {
        if (o.strict) throw ValidationError("id", "duplicate id '" + r.id + "'");
        ++s.rejected;
        --s.kept;
        ++s.rejection_reasons["duplicate_id"];
        continue;
      }
      all.push_back(std::move(r));
    }
    auto name = csv_escape(in);
    summary += name + ",read," + std::to_string(s.read) + "\n";
    summary += name + ",kept," + std::to_string(s.kept) + "\n";
    summary += name + ",rejected," + std::to_string(s.rejected) + "\n";
    for (const auto& [reason, n] : s.rejection_reasons)
      summary += name + ",rejected:" + reason + "," + std::to_string(n) + "\n";
    ctx.out << in << ": read " << s.read << ", kept " << s.kept << ", rejected " << s.rejected << "\n";
    for (const auto& [reason, n] : s.rejection_reasons) ctx.out << "  " << reason << ": " << n << "\n";
  }
  write_records(all, dir / "records.jsonl");
  write_text_file(dir / "ingest_summary.csv", summary);
  write_manifest(ctx, dir, inputs);
  return all.empty() ? kExitFailure : kExitOk;
}

int cmd_synth(Context& ctx, const SynthOptions& o) {
  auto process = parse_synth_process(o.process);
  if (!process) throw ValidationError("process", "expected iid, fgn or repetition, got '" + o.process + "'");
  SynthSpec spec{.process = *process,
                 .hurst_target = o.hurst,
                 .period = o.period,
                 .noise_std = o.noise,
                 .n_docs = o.docs,
                 .doc_length = o.len,
                 .rng_seed = ctx.g.seed};
  auto corpus = generate(spec);
  // --out may name the JSONL file itself.
  fs::path target(ctx.g.out);
  fs::path file;
  if (target.extension() == ".jsonl") {
    file = target;
    ctx.g.out = target.parent_path().empty() ? "." : target.parent_path().string();
  }
  auto dir = output_dir(ctx.g);
  if (file.empty()) file = dir / "synth.jsonl";
  write_records(corpus.documents, file);
  write_manifest(ctx, dir, {});
  ctx.out << "wrote " << corpus.size() << " documents to " << file.string() << "\n";
  return kExitOk;
}

int cmd_estimate(Context& ctx, const EstimateOptions& o) {
  auto est = estimation_config(ctx.g);
  auto pre = preprocess_config(ctx.g);
  auto records = select(read_store(o.store), Filter::parse(o.filter), "estimate");
  auto fields = parse_fields(o.group_by);

  std::map<CorpusKey, std::vector<DocumentRecord>> groups;
  for (auto& r : records) groups[fields.empty() ? full_key(r) : project_key(full_key(r), fields)].push_back(r);

  std::vector<SettingRow> rows;
  for (auto& [key, docs] : groups) rows.push_back(estimate_or_note(Corpus{key, preprocess(docs, pre)}, est));
  report_row_errors(ctx, rows);

  auto dir = output_dir(ctx.g);
  write_text_file(dir / "settings.csv", settings_csv(rows));
  write_results(settings_table(rows), dir / "results.csv");
  write_text_file(dir / "diagnostics.csv", diagnostics_csv(rows));
  write_fit_plots(ctx, dir, fit_series(rows, ExponentKind::holder), fit_series(rows, ExponentKind::hurst));
  write_manifest(ctx, dir, {o.store});

  bool any = false;
  for (const auto& r : rows) {
    any |= r.holder.has_value() || r.hurst.has_value();
    ctx.out << r.key.label() << "\tn=" << r.n_docs
            << "\tS=" << optional_number(r.holder ? std::optional(r.holder->point) : std::nullopt)
            << "\tH=" << optional_number(r.hurst ? std::optional(r.hurst->point) : std::nullopt) << "\n";
  }
  return any ? kExitOk : kExitFailure;
}

int cmd_compare(Context& ctx, const CompareOptions& o) {
  auto est = estimation_config(ctx.g);
  auto pre = preprocess_config(ctx.g);
  auto by = parse_field(o.by);
  auto records = read_store(o.store);
  auto llm = select(records, with_source(o.llm, Source::llm), "llm");
  auto human = select(records, with_source(o.human, Source::human), "human");

  std::map<CorpusKey, std::vector<DocumentRecord>> groups;
  for (auto& r : llm) groups[full_key(r)].push_back(r);

  AnalysisTable results;
  std::vector<std::pair<CorpusKey, AnalysisTable>> per_setting;
  std::vector<SettingRow> llm_rows;
  std::vector<std::pair<std::string, double>> bars;
  for (auto& [key, docs] : groups) {
    bool paired = std::any_of(docs.begin(), docs.end(), [](const auto& d) { return d.pair_id.has_value(); });
    std::vector<DocumentRecord> llm_docs;
    std::vector<DocumentRecord> human_docs;
    std::size_t unpaired = 0;
    if (paired) {
      std::set<std::string> wanted;
      for (const auto& d : docs)
        if (d.pair_id) wanted.insert(*d.pair_id);
      std::vector<DocumentRecord> partners;
      for (const auto& h : human)
        if (wanted.count(h.pair_id.value_or(h.id))) partners.push_back(h);
      auto res = pair_filter(docs, partners, pre);
      llm_docs = std::move(res.llm);
      human_docs = std::move(res.human);
      unpaired = res.unpaired_dropped;
    } else {
      std::vector<DocumentRecord> same_domain;
      for (const auto& h : human)
        if (!key.get(KeyField::domain) || h.domain == *key.get(KeyField::domain)) same_domain.push_back(h);
      llm_docs = preprocess(docs, pre);
      human_docs = preprocess(same_domain, pre);
    }
    auto label = key.label();
    if (unpaired) ctx.err << "warning: " << label << ": " << unpaired << " unpaired documents dropped\n";
    if (llm_docs.empty() || human_docs.empty()) {
      ctx.err << "warning: " << label << ": no comparable documents after preprocessing\n";
      continue;
    }
    CorpusKey hkey = project_key(key, {KeyField::domain, KeyField::scoring_model});
    hkey.set(KeyField::source, std::string(to_string(Source::human)));
    auto lrow = estimate_setting(Corpus{key, std::move(llm_docs)}, est);
    auto hrow = estimate_setting(Corpus{hkey, std::move(human_docs)}, est);
    report_row_errors(ctx, {lrow, hrow});
    auto table = compare_rows(lrow, hrow);
    table.add(label, "unpaired_dropped", static_cast<double>(unpaired), std::nullopt, lrow.n_docs);
    for (const auto& row : table.rows())
      if (row.statistic.rfind("log_ratio_", 0) == 0) bars.emplace_back(label + " " + row.statistic.substr(10), row.value);
    results.append(table);
    per_setting.emplace_back(key, table);
    llm_rows.push_back(std::move(lrow));
  }
  if (per_setting.empty()) throw EstimationError("no setting had comparable LLM and human documents");
  results.append(aggregate_log_ratios(per_setting, by));

  auto dir = output_dir(ctx.g);
  write_results(results, dir / "results.csv");
  write_text_file(dir / "settings.csv", settings_csv(llm_rows));
  write_text_file(dir / "ratios.svg",
                  bar_chart_svg({"Log-ratios LLM / human", "setting", "log ratio", stamp(ctx.g)}, bars));
  write_manifest(ctx, dir, {o.store});
  for (const auto& row : results.rows())
    ctx.out << row.group << "\t" << row.statistic << "\t" << format_number(row.value) << "\n";
  return kExitOk;
}

int cmd_mix(Context& ctx, const MixOptions& o) {
  auto est = estimation_config(ctx.g);
  auto pre = preprocess_config(ctx.g);
  auto records = read_store(o.store);
  Corpus llm{with_source(o.llm, Source::llm).key(), preprocess(select(records, with_source(o.llm, Source::llm), "llm"), pre)};
  Corpus human{with_source(o.human, Source::human).key(),
               preprocess(select(records, with_source(o.human, Source::human), "human"), pre)};
  auto seeds = o.seeds.empty() ? std::vector<std::uint64_t>{ctx.g.seed} : o.seeds;

  AnalysisTable results;
  std::map<ExponentKind, std::vector<std::pair<double, std::vector<double>>>> dist;
  std::map<ExponentKind, std::pair<std::vector<double>, Labels>> samples;
  for (double ratio : o.ratios) {
    auto& h_slot = dist[ExponentKind::holder].emplace_back(ratio, std::vector<double>{});
    auto& H_slot = dist[ExponentKind::hurst].emplace_back(ratio, std::vector<double>{});
    for (auto seed : seeds) {
      auto mixed = mix_corpora(human, llm, ratio, o.size, seed);
      auto series = mixed.series();
      auto group = "ratio=" + format_number(ratio) + ";seed=" + std::to_string(seed);
      auto cfg = est;
      cfg.rng_seed = seed;
      for (auto [kind, stat, slot] : {std::tuple{ExponentKind::holder, "mix_holder", &h_slot},
                                      std::tuple{ExponentKind::hurst, "mix_hurst", &H_slot}}) {
        try {
          auto e = estimate(series, kind, cfg);
          results.add(group, stat, e.point, std::nullopt, mixed.size());
          slot->second.push_back(e.point);
          samples[kind].first.push_back(e.point);
          samples[kind].second.push_back(format_number(ratio));
        } catch (const EstimationError& e) {
          ctx.err << "warning: " << group << ": " << stat << ": " << e.what() << "\n";
        }
      }
      try {
        results.add(group, "autocorrelation", autocorrelation(standardize_corpus(series, cfg.standardize), 1),
                    std::nullopt, mixed.size());
      } catch (const EstimationError& e) {
        ctx.err << "warning: " << group << ": autocorrelation: " << e.what() << "\n";
      }
    }
  }
  for (auto kind : {ExponentKind::holder, ExponentKind::hurst}) {
    const auto& [values, ratios] = samples[kind];
    if (values.empty()) continue;
    auto xs = to_labels(bin_values(values, o.bin_width));
    auto g = "ratio|" + std::string(to_string(kind));
    if (!(entropy(xs) > 0.0)) {
      results.add(g, "mi_nats", 0.0, std::nullopt, xs.size());
      continue;
    }
    auto mi = mutual_information(xs, ratios);
    results.add(g, "mi_nats", mi.mi_nats, std::nullopt, xs.size());
    results.add(g, "mi_normalized", mi.normalized, std::nullopt, xs.size());
  }

  auto dir = output_dir(ctx.g);
  write_results(results, dir / "results.csv");
  auto ts = stamp(ctx.g);
  write_text_file(dir / "mix_holder.svg",
                  distribution_svg({"Holder exponent by LLM share", "LLM share", "S", ts}, dist[ExponentKind::holder]));
  write_text_file(dir / "mix_hurst.svg",
                  distribution_svg({"Hurst exponent by LLM share", "LLM share", "H", ts}, dist[ExponentKind::hurst]));
  write_manifest(ctx, dir, {o.store});
  for (const auto& row : results.rows())
    ctx.out << row.group << "\t" << row.statistic << "\t" << format_number(row.value) << "\n";
  return kExitOk;
}

ExponentKind parse_target(const std::string& t) {
  if (t == "s" || t == "S" || t == "holder") return ExponentKind::holder;
  if (t == "h" || t == "H" || t == "hurst") return ExponentKind::hurst;
  throw ValidationError("target", "expected s or h, got '" + t + "'");
}

std::vector<SettingRow> load_settings(const std::string& path) {
  auto rows = parse_settings_csv(read_text(path));
  if (rows.empty()) throw EmptySelectionError(path + " holds no settings");
  return rows;
}

int cmd_mi(Context& ctx, const MiOptions& o) {
  auto target = parse_target(o.target);
  auto rows = load_settings(o.settings);
  auto results = mi_table(rows, target, parse_fields(o.vars), o.bin_width);
  if (!o.uncertainty.empty()) {
    // X = key field, Z = binned mean log-PPL, Y = binned exponent; one
    // sample per bootstrap replicate, as in the MI table.
    auto field = parse_field(o.uncertainty);
    Labels x;
    Labels z;
    std::vector<double> y_values;
    for (const auto& r : rows) {
      const auto& e = target == ExponentKind::holder ? r.holder : r.hurst;
      if (!e) continue;
      auto reps = e->resamples.empty() ? std::vector<double>{e->point} : e->resamples;
      std::vector<double> ppl{r.mean_log_ppl};
      auto zlabel = to_labels(bin_values(ppl, o.bin_width)).front();
      for (double v : reps) {
        x.push_back(r.key.get(field).value_or("<none>"));
        z.push_back(zlabel);
        y_values.push_back(v);
      }
    }
    if (x.empty()) throw EstimationError("no setting carries a " + std::string(to_string(target)) + " estimate");
    auto rep = uncertainty_reduction(x, {z}, to_labels(bin_values(y_values, o.bin_width)));
    auto g = std::string(to_string(field)) + "|mean_log_ppl+" + std::string(to_string(target));
    results.add(g, "u_without", rep.u_without, std::nullopt, x.size());
    results.add(g, "u_with", rep.u_with, std::nullopt, x.size());
    results.add(g, "uncertainty_reduction", rep.reduction, std::nullopt, x.size());
  }
  auto dir = output_dir(ctx.g);
  write_results(results, dir / "mi.csv");
  write_manifest(ctx, dir, {o.settings});
  for (const auto& row : results.rows())
    ctx.out << row.group << "\t" << row.statistic << "\t" << format_number(row.value) << "\n";
  return kExitOk;
}

int cmd_quality(Context& ctx, const QualityOptions& o) {
  auto rows = load_settings(o.settings);
  auto rep = quality_table(rows);
  auto dir = output_dir(ctx.g);
  write_results(rep.table, dir / "quality.csv");
  auto ts = stamp(ctx.g);
  for (auto [metric, name] : {std::pair{RowMetric::mean_log_ppl, "mean_log_ppl"},
                              std::pair{RowMetric::holder, "holder"}, std::pair{RowMetric::hurst, "hurst"}}) {
    std::vector<std::pair<double, double>> pts;
    std::vector<std::string> labels;
    for (const auto& r : rows) {
      auto v = row_metric(r, metric);
      if (!v || !r.mean_quality) continue;
      pts.emplace_back(*v, *r.mean_quality);
      labels.push_back(r.key.get(KeyField::prompt_method).value_or(""));
    }
    write_text_file(dir / (std::string("quality_") + name + ".svg"),
                    scatter_svg({std::string("Quality vs ") + name, name, "mean quality", ts}, pts, labels));
  }
  write_manifest(ctx, dir, {o.settings});
  for (const auto& c : rep.correlations) {
    ctx.out << "quality~" << c.metric << "\tn=" << c.n;
    if (c.result)
      ctx.out << "\tr=" << format_number(c.result->r) << "\tp=" << format_number(c.result->p_value);
    else if (c.zero_variance)
      ctx.out << "\tundefined (zero variance)";
    else
      ctx.out << "\tundefined (fewer than 3 settings)";
    ctx.out << "\n";
  }
  return kExitOk;
}

int cmd_report(Context& ctx, const ReportOptions& o) {
  auto rows = load_settings(o.settings);
  auto table = settings_table(rows);
  if (!o.vary.empty()) table.append(group_dispersion(rows, parse_field(o.vary), parse_fields(o.fix)));
  auto dir = output_dir(ctx.g);
  write_results(table, dir / "report.csv");
  auto ts = stamp(ctx.g);
  for (auto [metric, name] : {std::pair{RowMetric::holder, "holder"}, std::pair{RowMetric::hurst, "hurst"}}) {
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& r : rows)
      if (auto v = row_metric(r, metric)) bars.emplace_back(r.key.label(), *v);
    write_text_file(dir / (std::string("exponents_") + name + ".svg"),
                    bar_chart_svg({std::string(name) + " by setting", "setting", name, ts}, bars));
  }
  std::vector<fs::path> inputs{o.settings};
  if (!o.diagnostics.empty()) {
    inputs.emplace_back(o.diagnostics);
    // group_key,exponent,scale,value,count,total,slope,intercept,r2
    std::map<std::string, std::map<std::string, FitSeries>> by_kind;
    std::istringstream in(read_text(o.diagnostics));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto f = csv_split(line);
      if (f.size() != 9) throw ParseError(0, "diagnostics row has " + std::to_string(f.size()) + " fields");
      auto& s = by_kind[f[1]][f[0]];
      s.label = f[0];
      double scale = std::stod(f[2]);
      double value = std::stod(f[3]);
      if (value > 0.0) s.points.emplace_back(std::log(scale), std::log(value));
      if (!f[6].empty()) s.line = std::pair{std::stod(f[6]), std::stod(f[7])};
    }
    auto collect = [&](const std::string& kind) {
      std::vector<FitSeries> v;
      for (auto& [g, s] : by_kind[kind]) v.push_back(s);
      return v;
    };
    write_fit_plots(ctx, dir, collect("holder"), collect("hurst"));
  }
  write_manifest(ctx, dir, inputs);
  ctx.out << "wrote report for " << rows.size() << " settings to " << dir.string() << "\n";
  return kExitOk;
}

std::string statistics_footer() {
  std::string s = "Statistics in results CSVs:";
  for (auto name : kStatisticRegistry) {
    s += ' ';
    s += name;
  }
  return s + "\nExit codes: 0 success, 1 failure, 2 empty selection.";
}

}  // namespace

// -------------------------------------------------------------- settings csv

namespace {

const std::vector<std::string> kSettingsHeader = [] {
  std::vector<std::string> h{"group_key"};
  for (auto f : kKeyFields) h.emplace_back(to_string(f));
  for (const char* c : {"n_docs", "mean_log_ppl", "mean_log_ppl_se", "mean_quality"}) h.emplace_back(c);
  for (const char* k : {"holder", "hurst"})
    for (const char* c : {"", "_boot_mean", "_boot_std", "_r2", "_slope", "_intercept", "_failed", "_resamples",
                          "_error"})
      h.push_back(std::string(k) + c);
  return h;
}();

double to_double(const std::string& s, const std::string& col) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(0, "column " + col + ": not a number: '" + s + "'");
  return v;
}

std::size_t to_size(const std::string& s, const std::string& col) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ParseError(0, "column " + col + ": not a count: '" + s + "'");
  return v;
}

}  // namespace

std::string settings_csv(const std::vector<SettingRow>& rows) {
  std::string out;
  for (std::size_t i = 0; i < kSettingsHeader.size(); ++i) out += (i ? "," : "") + kSettingsHeader[i];
  out += '\n';
  for (const auto& r : rows) {
    std::vector<std::string> f{r.key.label()};
    for (auto k : kKeyFields) f.push_back(r.key.get(k).value_or(""));
    f.push_back(std::to_string(r.n_docs));
    f.push_back(format_number(r.mean_log_ppl));
    f.push_back(format_number(r.mean_log_ppl_se));
    f.push_back(r.mean_quality ? format_number(*r.mean_quality) : "");
    for (const auto* pair : {&r.holder, &r.hurst}) {
      const auto& e = *pair;
      const auto& error = pair == &r.holder ? r.holder_error : r.hurst_error;
      if (e) {
        std::string reps;
        for (std::size_t i = 0; i < e->resamples.size(); ++i) reps += (i ? ";" : "") + format_number(e->resamples[i]);
        for (double v : {e->point, e->boot_mean, e->boot_std, e->fit.r_squared, e->fit.slope, e->fit.intercept})
          f.push_back(format_number(v));
        f.push_back(std::to_string(e->failed_resamples));
        f.push_back(reps);
      } else {
        for (int i = 0; i < 8; ++i) f.emplace_back();
      }
      f.push_back(error);
    }
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + csv_escape(f[i]);
    out += '\n';
  }
  return out;
}

std::vector<SettingRow> parse_settings_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || csv_split(line) != kSettingsHeader)
    throw ParseError(1, "not a settings CSV (unexpected header)");
  std::vector<SettingRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = csv_split(line);
    if (f.size() != kSettingsHeader.size())
      throw ParseError(line_no, "expected " + std::to_string(kSettingsHeader.size()) + " fields, got " +
                                    std::to_string(f.size()));
    try {
      SettingRow r;
      std::size_t c = 1;
      for (auto k : kKeyFields) {
        if (!f[c].empty()) r.key.set(k, f[c]);
        ++c;
      }
      r.n_docs = to_size(f[c++], "n_docs");
      r.mean_log_ppl = to_double(f[c++], "mean_log_ppl");
      r.mean_log_ppl_se = to_double(f[c++], "mean_log_ppl_se");
      if (!f[c].empty()) r.mean_quality = to_double(f[c], "mean_quality");
      ++c;
      for (auto kind : {ExponentKind::holder, ExponentKind::hurst}) {
        auto& slot = kind == ExponentKind::holder ? r.holder : r.hurst;
        auto& error = kind == ExponentKind::holder ? r.holder_error : r.hurst_error;
        if (!f[c].empty()) {
          FractalEstimate e;
          e.kind = kind;
          e.n_documents = r.n_docs;
          e.point = to_double(f[c], "point");
          e.boot_mean = to_double(f[c + 1], "boot_mean");
          e.boot_std = to_double(f[c + 2], "boot_std");
          e.fit.r_squared = to_double(f[c + 3], "r2");
          e.fit.slope = to_double(f[c + 4], "slope");
          e.fit.intercept = to_double(f[c + 5], "intercept");
          e.failed_resamples = to_size(f[c + 6], "failed");
          std::istringstream reps(f[c + 7]);
          std::string tok;
          while (std::getline(reps, tok, ';')) e.resamples.push_back(to_double(tok, "resamples"));
          slot = std::move(e);
        }
        error = f[c + 8];
        c += 9;
      }
      rows.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return rows;
}

std::string diagnostics_csv(const std::vector<SettingRow>& rows) {
  std::string out = "group_key,exponent,scale,value,count,total,slope,intercept,r2\n";
  for (const auto& r : rows) {
    auto g = csv_escape(r.key.label());
    if (r.holder) {
      const auto& e = *r.holder;
      auto tail = "," + format_number(e.fit.slope) + "," + format_number(e.fit.intercept) + "," +
                  format_number(e.fit.r_squared) + "\n";
      for (const auto& p : e.mass_points)
        out += g + ",holder," + std::to_string(p.tau) + "," + format_number(p.mass) + "," +
               std::to_string(p.hit_count) + "," + std::to_string(p.window_count) + tail;
    }
    if (r.hurst) {
      const auto& e = *r.hurst;
      auto tail = "," + format_number(e.fit.slope) + "," + format_number(e.fit.intercept) + "," +
                  format_number(e.fit.r_squared) + "\n";
      for (const auto& p : e.rs_points)
        out += g + ",hurst," + std::to_string(p.n) + "," + format_number(p.mean_ratio) + "," +
               std::to_string(p.block_count) + "," + tail;
    }
  }
  return out;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> md(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!md || EVP_DigestInit_ex(md.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    EVP_DigestUpdate(md.get(), buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(md.get(), digest, &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xf];
  }
  return hex;
}

// ------------------------------------------------------------------- driver

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fractal parameters of per-token log-perplexity streams", "lmfractal"};
  app.footer(statistics_footer());
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the flags; command line wins");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_version_flag("--version", LMFRACTAL_VERSION);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--scales", g.scales, "Scale grid (comma list)")->delimiter(',');
  app.add_option("--epsilon", g.epsilon, "Holder increment threshold");
  app.add_option("--boot", g.boot, "Bootstrap resamples");
  app.add_option("--warmup", g.warmup, "Leading tokens dropped per document");
  app.add_option("--min-len", g.min_len, "Minimum post-warm-up length");
  app.add_option("--clip-len", g.clip_len, "Length every document is clipped to");
  app.add_option("--standardize", g.standardize, "corpus or document")->check(CLI::IsMember({"corpus", "document"}));
  app.add_flag("--deterministic", g.deterministic, "Omit timestamps from manifests and SVGs");
  app.add_option("--out", g.out, "Output directory");

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Convert GAGLE or canonical JSONL into one canonical store");
  c_ingest->add_option("inputs", ingest.inputs, "Input JSONL files")->required()->check(CLI::ExistingFile);
  c_ingest->add_option("--format", ingest.format, "gagle or canonical")->check(CLI::IsMember({"gagle", "canonical"}));
  c_ingest->add_flag("--strict", ingest.strict, "Fail on the first bad record instead of tallying");

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with a known exponent");
  c_synth->add_option("--process", synth.process, "iid, fgn or repetition");
  c_synth->add_option("--hurst", synth.hurst, "Target H for fgn");
  c_synth->add_option("--period", synth.period, "Block length for repetition");
  c_synth->add_option("--noise", synth.noise, "Noise std for repetition");
  c_synth->add_option("--docs", synth.docs, "Documents");
  c_synth->add_option("--len", synth.len, "Tokens per document");

  EstimateOptions estimate_o;
  auto* c_estimate = app.add_subcommand("estimate", "Estimate S and H per setting");
  c_estimate->add_option("--store", estimate_o.store, "Canonical JSONL store")->required()->check(CLI::ExistingFile);
  c_estimate->add_option("filter", estimate_o.filter, "key=value terms");
  c_estimate->add_option("--group-by", estimate_o.group_by, "Key fields defining a setting (default: all)")
      ->delimiter(',');

  CompareOptions compare;
  auto* c_compare = app.add_subcommand("compare", "Log-ratios of LLM settings against human text");
  c_compare->add_option("--store", compare.store, "Canonical JSONL store")->required()->check(CLI::ExistingFile);
  c_compare->add_option("--llm", compare.llm, "key=value terms for the LLM side");
  c_compare->add_option("--human", compare.human, "key=value terms for the human side");
  c_compare->add_option("--by", compare.by, "Key field the log-ratios are averaged over");

  MixOptions mix;
  auto* c_mix = app.add_subcommand("mix", "Estimates over human/LLM mixtures");
  c_mix->add_option("--store", mix.store, "Canonical JSONL store")->required()->check(CLI::ExistingFile);
  c_mix->add_option("--llm", mix.llm, "key=value terms for the LLM side");
  c_mix->add_option("--human", mix.human, "key=value terms for the human side");
  c_mix->add_option("--ratios", mix.ratios, "LLM shares (comma list)")->delimiter(',');
  c_mix->add_option("--size", mix.size, "Documents per mixture");
  c_mix->add_option("--seeds", mix.seeds, "Mixing seeds (comma list, default --seed)")->delimiter(',');
  c_mix->add_option("--bin-width", mix.bin_width, "Bin width for MI");

  MiOptions mi;
  auto* c_mi = app.add_subcommand("mi", "Normalized mutual information between exponents and settings");
  c_mi->add_option("--settings", mi.settings, "settings.csv from estimate")->required()->check(CLI::ExistingFile);
  c_mi->add_option("--target", mi.target, "s or h");
  c_mi->add_option("--vars", mi.vars, "Key fields (comma list)")->delimiter(',');
  c_mi->add_option("--bin-width", mi.bin_width, "Bin width");
  c_mi->add_option("--uncertainty", mi.uncertainty,
                   "Key field X: report H(X|log-PPL) and H(X|log-PPL, exponent)");

  QualityOptions quality;
  auto* c_quality = app.add_subcommand("quality", "Correlate mean quality with log-PPL, S and H");
  c_quality->add_option("--settings", quality.settings, "settings.csv from estimate")->required()->check(CLI::ExistingFile);

  ReportOptions report;
  auto* c_report = app.add_subcommand("report", "Redraw plots and tables from earlier outputs");
  c_report->add_option("--settings", report.settings, "settings.csv")->required()->check(CLI::ExistingFile);
  c_report->add_option("--diagnostics", report.diagnostics, "diagnostics.csv")->check(CLI::ExistingFile);
  c_report->add_option("--vary", report.vary, "Key field whose levels are compared for dispersion");
  c_report->add_option("--fix", report.fix, "Key fields held fixed (comma list)")->delimiter(',');

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFailure;
  }

  auto* sub = app.get_subcommands().front();
  json snapshot = json::object();
  for (const auto* a : {static_cast<const CLI::App*>(&app), static_cast<const CLI::App*>(sub)})
    for (const auto* opt : a->get_options()) {
      if (opt->get_name() == "--help" || opt->get_name() == "--version" || opt->get_name() == "--config") continue;
      auto name = opt->get_lnames().empty() ? opt->get_name() : opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& r = opt->reduced_results();
        snapshot[name] = r.size() == 1 ? json(r.front()) : json(r);
      } else
        snapshot[name] = opt->get_default_str();
    }

  Context ctx{g, out, err, sub->get_name(), snapshot};
  try {
    if (sub == c_ingest) return cmd_ingest(ctx, ingest);
    if (sub == c_synth) return cmd_synth(ctx, synth);
    if (sub == c_estimate) return cmd_estimate(ctx, estimate_o);
    if (sub == c_compare) return cmd_compare(ctx, compare);
    if (sub == c_mix) return cmd_mix(ctx, mix);
    if (sub == c_mi) return cmd_mi(ctx, mi);
    if (sub == c_quality) return cmd_quality(ctx, quality);
    return cmd_report(ctx, report);
  } catch (const EmptySelectionError& e) {
    err << "error: " << e.what() << "\n";
    if (!e.available().empty()) {
      err << "available keys:\n";
      for (const auto& k : e.available()) err << "  " << k << "\n";
    }
    return kExitEmptySelection;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace lmfractal
