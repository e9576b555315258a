#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "lmfractal/record.hpp"

namespace lmfractal {

enum class SynthProcess { iid_gaussian, fgn, repetition };
std::string_view to_string(SynthProcess p);
std::optional<SynthProcess> parse_synth_process(std::string_view s);

struct SynthSpec {
  SynthProcess process = SynthProcess::iid_gaussian;
  double hurst_target = 0.5;   // fgn
  std::size_t period = 8;      // repetition
  double noise_std = 0.0;      // repetition
  std::size_t n_docs = 500;
  std::size_t doc_length = 400;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Autocovariance of unit-variance fractional Gaussian noise at lag k.
double fgn_autocovariance(double hurst, std::size_t k);

/// Documents of iid standard Gaussian scores.
Corpus gen_iid(const SynthSpec& spec);

/// Exact fractional Gaussian noise by circulant embedding. The embedding
/// doubles until its spectrum is nonnegative (values above -1e-10 are
/// clipped to zero); GenerationError if that never happens.
Corpus gen_fgn(const SynthSpec& spec);

/// A random standard Gaussian block of length `period`, tiled to the
/// document length, plus iid Gaussian noise of `noise_std`. One block per
/// document.
Corpus gen_repetition(const SynthSpec& spec);

/// Dispatches on spec.process.
Corpus generate(const SynthSpec& spec);

}  // namespace lmfractal
