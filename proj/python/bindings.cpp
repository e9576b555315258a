#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "lmfractal/analysis.hpp"
#include "lmfractal/errors.hpp"
#include "lmfractal/fractal.hpp"
#include "lmfractal/ingest.hpp"
#include "lmfractal/preprocess.hpp"
#include "lmfractal/synth.hpp"

namespace py = pybind11;
using namespace lmfractal;

namespace {

ExponentKind kind_of(const std::string& s) {
  if (s == "holder" || s == "s" || s == "S") return ExponentKind::holder;
  if (s == "hurst" || s == "h" || s == "H") return ExponentKind::hurst;
  throw ValidationError("kind", "expected holder or hurst, got '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_lmfractal, m) {
  m.doc() = "Holder and Hurst exponents of per-token log-perplexity streams";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<EmptySelectionError>(m, "EmptySelectionError", base.ptr());
  auto est_err = py::register_exception<EstimationError>(m, "EstimationError", base.ptr());
  py::register_exception<InsufficientScalesError>(m, "InsufficientScalesError", est_err.ptr());

  py::enum_<StandardizeMode>(m, "StandardizeMode")
      .value("corpus", StandardizeMode::corpus)
      .value("document", StandardizeMode::document);

  py::class_<EstimationConfig>(m, "EstimationConfig")
      .def(py::init([](std::vector<int> scales, double epsilon, std::size_t bootstrap_samples, std::uint64_t seed,
                       const std::string& standardize) {
             EstimationConfig c;
             c.scales = std::move(scales);
             c.epsilon = epsilon;
             c.bootstrap_samples = bootstrap_samples;
             c.rng_seed = seed;
             auto mode = parse_standardize_mode(standardize);
             if (!mode) throw ValidationError("standardize", "expected corpus or document");
             c.standardize = *mode;
             c.validate();
             return c;
           }),
           py::arg("scales") = kDefaultScales, py::arg("epsilon") = 1e-2, py::arg("bootstrap_samples") = 10,
           py::arg("seed") = 0, py::arg("standardize") = "corpus")
      .def_readwrite("scales", &EstimationConfig::scales)
      .def_readwrite("epsilon", &EstimationConfig::epsilon)
      .def_readwrite("bootstrap_samples", &EstimationConfig::bootstrap_samples)
      .def_readwrite("seed", &EstimationConfig::rng_seed);

  py::class_<PowerLawFit>(m, "PowerLawFit")
      .def_readonly("slope", &PowerLawFit::slope)
      .def_readonly("intercept", &PowerLawFit::intercept)
      .def_readonly("r_squared", &PowerLawFit::r_squared)
      .def_readonly("points", &PowerLawFit::points);

  py::class_<FractalEstimate>(m, "FractalEstimate")
      .def_property_readonly("kind", [](const FractalEstimate& e) { return std::string(to_string(e.kind)); })
      .def_readonly("point", &FractalEstimate::point)
      .def_readonly("boot_mean", &FractalEstimate::boot_mean)
      .def_readonly("boot_std", &FractalEstimate::boot_std)
      .def_readonly("fit", &FractalEstimate::fit)
      .def_readonly("n_documents", &FractalEstimate::n_documents)
      .def_readonly("resamples", &FractalEstimate::resamples)
      .def_readonly("failed_resamples", &FractalEstimate::failed_resamples)
      .def("__eq__", [](const FractalEstimate& a, const FractalEstimate& b) { return a == b; })
      .def("__repr__", [](const FractalEstimate& e) {
        return "<FractalEstimate " + std::string(to_string(e.kind)) + "=" + format_number(e.point) + ">";
      });

  // The core takes spans; Python hands over lists, converted to vectors here.
  using Points = std::vector<std::pair<double, double>>;
  using Corpus2d = std::vector<Series>;
  m.def("fit_power_law", [](const Points& p) { return fit_power_law(p); }, py::arg("points"));
  m.def("rs_statistic", [](const Series& x, std::size_t n) { return rs_statistic(x, n); }, py::arg("x"),
        py::arg("n"));
  m.def(
      "standardize_corpus", [](const Corpus2d& c, StandardizeMode mode) { return standardize_corpus(c, mode); },
      py::arg("corpus"), py::arg("mode") = StandardizeMode::corpus);
  m.def(
      "estimate_holder", [](const Corpus2d& c, const EstimationConfig& cfg) { return estimate_holder(c, cfg); },
      py::arg("corpus"), py::arg("cfg") = EstimationConfig{});
  m.def(
      "estimate_hurst", [](const Corpus2d& c, const EstimationConfig& cfg) { return estimate_hurst(c, cfg); },
      py::arg("corpus"), py::arg("cfg") = EstimationConfig{});
  m.def(
      "bootstrap",
      [](const Corpus2d& corpus, const std::string& kind, const EstimationConfig& cfg) {
        return bootstrap(corpus, kind_of(kind), cfg);
      },
      py::arg("corpus"), py::arg("kind"), py::arg("cfg") = EstimationConfig{});
  m.def(
      "autocorrelation",
      [](const Corpus2d& corpus, std::size_t lag) { return autocorrelation(standardize_corpus(corpus), lag); },
      py::arg("corpus"), py::arg("lag"), "Lag autocorrelation of the pooled-standardized corpus.");

  m.def(
      "generate",
      [](const std::string& process, double hurst, std::size_t period, double noise, std::size_t docs,
         std::size_t length, std::uint64_t seed) {
        auto p = parse_synth_process(process);
        if (!p) throw ValidationError("process", "expected iid, fgn or repetition");
        return generate({.process = *p,
                         .hurst_target = hurst,
                         .period = period,
                         .noise_std = noise,
                         .n_docs = docs,
                         .doc_length = length,
                         .rng_seed = seed})
            .series();
      },
      py::arg("process"), py::arg("hurst") = 0.5, py::arg("period") = 8, py::arg("noise") = 0.0,
      py::arg("docs") = 500, py::arg("length") = 400, py::arg("seed") = 0,
      "Synthetic corpus as a list of score sequences.");

  m.def(
      "load_scores",
      [](const std::filesystem::path& path, const std::vector<std::string>& filter, std::size_t warmup,
         std::size_t min_length, std::size_t clip_length) {
        auto c = load_corpus(path, Filter::parse(filter));
        PreprocessConfig cfg{.warmup_tokens = warmup, .min_length = min_length, .clip_length = clip_length};
        return Corpus{c.key, preprocess(c.documents, cfg)}.series();
      },
      py::arg("path"), py::arg("filter") = std::vector<std::string>{}, py::arg("warmup") = 64,
      py::arg("min_length") = 400, py::arg("clip_length") = 400,
      "Preprocessed score sequences of the canonical records matching key=value terms.");
  m.def("parse_quality_rating", &parse_quality_rating, py::arg("text"));

  m.def("entropy", &entropy, py::arg("labels"));
  m.def(
      "mutual_information",
      [](const Labels& xs, const Labels& ys) {
        auto mi = mutual_information(xs, ys);
        return py::make_tuple(mi.mi_nats, mi.normalized);
      },
      py::arg("xs"), py::arg("ys"), "(mi_nats, normalized) with normalization by entropy(xs).");
  m.def(
      "pearson",
      [](const std::vector<double>& xs, const std::vector<double>& ys) {
        auto r = pearson(xs, ys);
        return py::make_tuple(r.r, r.p_value);
      },
      py::arg("xs"), py::arg("ys"));
  m.def(
      "bin_values", [](const std::vector<double>& v, double width) { return bin_values(v, width); },
      py::arg("values"), py::arg("width") = 0.1);
}
