#include "lmfractal/synth.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <random>
#include <string>

#include "lmfractal/errors.hpp"
#include "lmfractal/fractal.hpp"

namespace lmfractal {

std::string_view to_string(SynthProcess p) {
  switch (p) {
    case SynthProcess::iid_gaussian: return "iid_gaussian";
    case SynthProcess::fgn: return "fgn";
    case SynthProcess::repetition: return "repetition";
  }
  return "";
}

std::optional<SynthProcess> parse_synth_process(std::string_view s) {
  if (s == "iid_gaussian" || s == "iid") return SynthProcess::iid_gaussian;
  if (s == "fgn") return SynthProcess::fgn;
  if (s == "repetition") return SynthProcess::repetition;
  return std::nullopt;
}

void SynthSpec::validate() const {
  if (n_docs == 0) throw ValidationError("n_docs", "must be >= 1");
  if (doc_length == 0) throw ValidationError("doc_length", "must be >= 1");
  if (process == SynthProcess::fgn && !(hurst_target > 0.0 && hurst_target < 1.0))
    throw ValidationError("hurst_target", "must lie strictly between 0 and 1");
  if (process == SynthProcess::repetition) {
    if (period == 0) throw ValidationError("period", "must be >= 1");
    if (!(noise_std >= 0.0)) throw ValidationError("noise_std", "must be >= 0");
  }
}

double fgn_autocovariance(double hurst, std::size_t k) {
  const double h2 = 2.0 * hurst;
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, h2) - 2.0 * std::pow(kd, h2) + std::pow(std::abs(kd - 1.0), h2));
}

namespace {

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

FftwBuffer make_buffer(std::size_t n) {
  return FftwBuffer(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n)));
}

class ForwardPlan {
 public:
  ForwardPlan(std::size_t n, fftw_complex* in, fftw_complex* out)
      : plan_(fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE)) {
    if (!plan_) throw GenerationError("FFTW could not create a plan of size " + std::to_string(n));
  }
  ~ForwardPlan() { fftw_destroy_plan(plan_); }
  ForwardPlan(const ForwardPlan&) = delete;
  ForwardPlan& operator=(const ForwardPlan&) = delete;
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

DocumentRecord synthetic_record(const SynthSpec& spec, std::size_t index, std::vector<double> scores) {
  DocumentRecord r;
  r.id = "synth-" + std::string(to_string(spec.process)) + "-" + std::to_string(spec.rng_seed) + "-" +
         std::to_string(index);
  r.source = Source::synthetic;
  r.scoring_model = "synthetic";
  r.domain = "synthetic";
  std::string model(to_string(spec.process));
  if (spec.process == SynthProcess::fgn) model += "(H=" + format_number(spec.hurst_target) + ")";
  if (spec.process == SynthProcess::repetition)
    model += "(period=" + std::to_string(spec.period) + ",noise=" + format_number(spec.noise_std) + ")";
  r.generator_model = model;
  r.scores = std::move(scores);
  return r;
}

Corpus make_corpus(std::vector<DocumentRecord> docs) {
  Corpus c;
  c.key = full_key(docs.front());
  c.documents = std::move(docs);
  return c;
}

/// Eigenvalues sqrt(lambda_k / m) of the circulant embedding of the fGn
/// covariance, for the smallest admissible power-of-two size m.
std::vector<double> embedding_amplitudes(double hurst, std::size_t n) {
  std::size_t m = 2;
  while (m < 2 * (n > 1 ? n - 1 : 1)) m *= 2;
  constexpr std::size_t kMaxEmbedding = std::size_t{1} << 24;
  for (; m <= kMaxEmbedding; m *= 2) {
    auto in = make_buffer(m);
    auto out = make_buffer(m);
    ForwardPlan plan(m, in.get(), out.get());
    for (std::size_t k = 0; k < m; ++k) {
      std::size_t lag = k <= m / 2 ? k : m - k;
      in[k][0] = fgn_autocovariance(hurst, lag);
      in[k][1] = 0.0;
    }
    plan.execute();
    std::vector<double> amp(m);
    bool ok = true;
    for (std::size_t k = 0; k < m; ++k) {
      double lambda = out[k][0];
      if (lambda < -1e-10) {
        ok = false;
        break;
      }
      amp[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
    }
    if (ok) return amp;
  }
  throw GenerationError("circulant embedding has negative eigenvalues up to size " +
                        std::to_string(kMaxEmbedding) + "; try a longer embedding");
}

}  // namespace

Corpus gen_iid(const SynthSpec& spec) {
  spec.validate();
  std::vector<DocumentRecord> docs;
  docs.reserve(spec.n_docs);
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    std::mt19937_64 rng(derive_seed(spec.rng_seed, d));
    std::normal_distribution<double> normal;
    std::vector<double> x(spec.doc_length);
    for (auto& v : x) v = normal(rng);
    docs.push_back(synthetic_record(spec, d, std::move(x)));
  }
  return make_corpus(std::move(docs));
}

Corpus gen_fgn(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.doc_length;
  auto amp = embedding_amplitudes(spec.hurst_target, n);
  const std::size_t m = amp.size();
  auto in = make_buffer(m);
  auto out = make_buffer(m);
  ForwardPlan plan(m, in.get(), out.get());

  std::vector<DocumentRecord> docs;
  docs.reserve(spec.n_docs);
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    std::mt19937_64 rng(derive_seed(spec.rng_seed, d));
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < m; ++k) {
      in[k][0] = amp[k] * normal(rng);
      in[k][1] = amp[k] * normal(rng);
    }
    plan.execute();
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = out[t][0];
    docs.push_back(synthetic_record(spec, d, std::move(x)));
  }
  return make_corpus(std::move(docs));
}

Corpus gen_repetition(const SynthSpec& spec) {
  spec.validate();
  std::vector<DocumentRecord> docs;
  docs.reserve(spec.n_docs);
  for (std::size_t d = 0; d < spec.n_docs; ++d) {
    std::mt19937_64 rng(derive_seed(spec.rng_seed, d));
    std::normal_distribution<double> normal;
    std::vector<double> block(spec.period);
    for (auto& v : block) v = normal(rng);
    std::vector<double> x(spec.doc_length);
    for (std::size_t t = 0; t < x.size(); ++t) {
      x[t] = block[t % spec.period];
      if (spec.noise_std > 0.0) x[t] += spec.noise_std * normal(rng);
    }
    docs.push_back(synthetic_record(spec, d, std::move(x)));
  }
  return make_corpus(std::move(docs));
}

Corpus generate(const SynthSpec& spec) {
  switch (spec.process) {
    case SynthProcess::iid_gaussian: return gen_iid(spec);
    case SynthProcess::fgn: return gen_fgn(spec);
    case SynthProcess::repetition: return gen_repetition(spec);
  }
  return gen_iid(spec);
}

}  // namespace lmfractal
