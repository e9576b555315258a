#include "lmfractal/preprocess.hpp"

#include <map>
#include <string>

#include "lmfractal/errors.hpp"

namespace lmfractal {

void PreprocessConfig::validate() const {
  if (min_length == 0) throw ValidationError("min_length", "must be > 0");
  if (clip_length == 0) throw ValidationError("clip_length", "must be > 0");
  if (clip_length > min_length) throw ValidationError("clip_length", "must not exceed min_length");
}

DocumentRecord trim_warmup(DocumentRecord record, const PreprocessConfig& cfg) {
  auto& s = record.scores;
  s.erase(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(std::min(cfg.warmup_tokens, s.size())));
  return record;
}

std::vector<DocumentRecord> filter_and_clip(std::vector<DocumentRecord> records,
                                            const PreprocessConfig& cfg) {
  cfg.validate();
  std::vector<DocumentRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    if (r.scores.size() < cfg.min_length) continue;
    r.scores.resize(cfg.clip_length);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<DocumentRecord> preprocess(std::vector<DocumentRecord> records,
                                       const PreprocessConfig& cfg) {
  for (auto& r : records) r = trim_warmup(std::move(r), cfg);
  return filter_and_clip(std::move(records), cfg);
}

PairFilterResult pair_filter(const std::vector<DocumentRecord>& llm_records,
                             const std::vector<DocumentRecord>& human_records,
                             const PreprocessConfig& cfg) {
  cfg.validate();
  std::map<std::string, std::size_t> human_index;
  for (std::size_t i = 0; i < human_records.size(); ++i) {
    const auto& h = human_records[i];
    const auto& key = h.pair_id ? *h.pair_id : h.id;
    if (!human_index.emplace(key, i).second)
      throw ValidationError("pair_id", "duplicate pairing key '" + key + "' among human records");
  }
  std::map<std::string, std::size_t> seen_llm;
  for (std::size_t i = 0; i < llm_records.size(); ++i) {
    const auto& p = llm_records[i].pair_id;
    if (p && !seen_llm.emplace(*p, i).second)
      throw ValidationError("pair_id", "duplicate pair_id '" + *p + "' among LLM records");
  }

  PairFilterResult out;
  std::vector<bool> human_matched(human_records.size(), false);
  for (const auto& l : llm_records) {
    auto it = l.pair_id ? human_index.find(*l.pair_id) : human_index.end();
    if (it == human_index.end()) {
      ++out.unpaired_dropped;
      continue;
    }
    human_matched[it->second] = true;
    const auto& h = human_records[it->second];
    if (l.scores.size() < cfg.min_length || h.scores.size() < cfg.min_length) {
      ++out.length_dropped;
      continue;
    }
    auto lc = l;
    auto hc = h;
    lc.scores.resize(cfg.clip_length);
    hc.scores.resize(cfg.clip_length);
    out.llm.push_back(std::move(lc));
    out.human.push_back(std::move(hc));
  }
  for (bool m : human_matched)
    if (!m) ++out.unpaired_dropped;
  return out;
}

}  // namespace lmfractal
