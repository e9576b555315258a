#pragma once

#include <cstddef>
#include <vector>

#include "lmfractal/record.hpp"

namespace lmfractal {

/// Document protocol: drop a warm-up prefix, reject short documents, clip
/// survivors to a common length.
struct PreprocessConfig {
  std::size_t warmup_tokens = 64;
  std::size_t min_length = 400;
  std::size_t clip_length = 400;

  /// Throws ValidationError unless 0 < clip_length <= min_length.
  void validate() const;
};

DocumentRecord trim_warmup(DocumentRecord record, const PreprocessConfig& cfg);

/// Keeps records with at least min_length scores, clipped to clip_length.
std::vector<DocumentRecord> filter_and_clip(std::vector<DocumentRecord> records,
                                            const PreprocessConfig& cfg);

/// trim_warmup on every record followed by filter_and_clip.
std::vector<DocumentRecord> preprocess(std::vector<DocumentRecord> records,
                                       const PreprocessConfig& cfg);

struct PairFilterResult {
  std::vector<DocumentRecord> llm;
  std::vector<DocumentRecord> human;  // human[i] is the partner of llm[i]
  std::size_t unpaired_dropped = 0;   // records with no partner on the other side
  std::size_t length_dropped = 0;     // pairs lost because either member was short
};

/// Pairs LLM records (by pair_id) with human records (by pair_id, falling
/// back to id). A pair survives only when both members pass filter_and_clip;
/// records without a partner are dropped and counted. Inputs must already be
/// warm-up trimmed. A repeated pairing key on one side is a ValidationError.
PairFilterResult pair_filter(const std::vector<DocumentRecord>& llm_records,
                             const std::vector<DocumentRecord>& human_records,
                             const PreprocessConfig& cfg);

}  // namespace lmfractal
