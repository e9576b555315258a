#include "lmfractal/record.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "lmfractal/errors.hpp"

namespace lmfractal {

std::string_view to_string(Source s) {
  switch (s) {
    case Source::human: return "human";
    case Source::llm: return "llm";
    case Source::synthetic: return "synthetic";
  }
  return "human";
}

std::string_view to_string(GeneratorKind k) {
  return k == GeneratorKind::pretrained ? "pretrained" : "instruction_tuned";
}

std::optional<Source> parse_source(std::string_view s) {
  if (s == "human") return Source::human;
  if (s == "llm") return Source::llm;
  if (s == "synthetic") return Source::synthetic;
  return std::nullopt;
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view s) {
  if (s == "pretrained") return GeneratorKind::pretrained;
  if (s == "instruction_tuned") return GeneratorKind::instruction_tuned;
  return std::nullopt;
}

bool is_prompt_method(std::string_view label) {
  return std::find(kPromptMethods.begin(), kPromptMethods.end(), label) != kPromptMethods.end();
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void validate(const DocumentRecord& r) {
  if (r.id.empty()) throw ValidationError("id", "must be a non-empty string");
  if (r.scores.empty()) throw ValidationError("scores", "must be non-empty");
  for (std::size_t i = 0; i < r.scores.size(); ++i) {
    if (!std::isfinite(r.scores[i]))
      throw ValidationError("scores", "non-finite value at index " + std::to_string(i));
  }
  if (r.source == Source::human) {
    if (r.generator_model) throw ValidationError("generator_model", "must be absent for human documents");
    if (r.prompt_method) throw ValidationError("prompt_method", "must be absent for human documents");
    if (r.temperature) throw ValidationError("temperature", "must be absent for human documents");
  }
  if (r.prompt_method && !is_prompt_method(*r.prompt_method))
    throw ValidationError("prompt_method", "unknown label '" + *r.prompt_method +
                                               "' (accepted: cont, cot, kw, kw+, su, su+, exc)");
  if (r.temperature && (!std::isfinite(*r.temperature) || *r.temperature < 0.0))
    throw ValidationError("temperature", "must be a finite number >= 0");
  if (r.quality_rating && (*r.quality_rating < 1 || *r.quality_rating > 5))
    throw ValidationError("quality_rating", "must be in 1..5");
}

std::string_view to_string(KeyField f) {
  switch (f) {
    case KeyField::source: return "source";
    case KeyField::scoring_model: return "scoring_model";
    case KeyField::generator_model: return "generator_model";
    case KeyField::generator_kind: return "generator_kind";
    case KeyField::temperature: return "temperature";
    case KeyField::prompt_method: return "prompt_method";
    case KeyField::domain: return "domain";
  }
  return "";
}

std::optional<KeyField> parse_key_field(std::string_view name) {
  for (auto f : kKeyFields)
    if (to_string(f) == name) return f;
  if (name == "prompt") return KeyField::prompt_method;
  if (name == "model") return KeyField::generator_model;
  if (name == "temp") return KeyField::temperature;
  if (name == "scorer") return KeyField::scoring_model;
  if (name == "kind") return KeyField::generator_kind;
  return std::nullopt;
}

std::optional<std::string> field_value(const DocumentRecord& r, KeyField f) {
  switch (f) {
    case KeyField::source: return std::string(to_string(r.source));
    case KeyField::scoring_model: return r.scoring_model;
    case KeyField::generator_model: return r.generator_model;
    case KeyField::generator_kind:
      if (r.generator_kind) return std::string(to_string(*r.generator_kind));
      return std::nullopt;
    case KeyField::temperature:
      if (r.temperature) return format_number(*r.temperature);
      return std::nullopt;
    case KeyField::prompt_method: return r.prompt_method;
    case KeyField::domain: return r.domain;
  }
  return std::nullopt;
}

bool CorpusKey::empty() const {
  return std::none_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

std::string CorpusKey::label() const {
  std::string out;
  for (auto f : kKeyFields) {
    const auto& v = get(f);
    if (!v) continue;
    if (!out.empty()) out += ';';
    out += to_string(f);
    out += '=';
    out += *v;
  }
  return out.empty() ? "*" : out;
}

CorpusKey full_key(const DocumentRecord& r) {
  CorpusKey k;
  for (auto f : kKeyFields) k.set(f, field_value(r, f));
  return k;
}

CorpusKey project_key(const CorpusKey& key, const std::vector<KeyField>& fields) {
  CorpusKey out;
  for (auto f : fields) out.set(f, key.get(f));
  return out;
}

Filter Filter::parse(const std::vector<std::string>& terms) {
  Filter filter;
  for (const auto& term : terms) {
    auto eq = term.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("filter", "expected key=value, got '" + term + "'");
    auto name = term.substr(0, eq);
    auto field = parse_key_field(name);
    if (!field) {
      std::string known;
      for (auto f : kKeyFields) {
        if (!known.empty()) known += ", ";
        known += to_string(f);
      }
      throw ValidationError("filter", "unknown key '" + name + "' (known: " + known + ")");
    }
    filter.add(*field, term.substr(eq + 1));
  }
  return filter;
}

void Filter::add(KeyField f, std::string value) {
  if (f == KeyField::temperature) {
    double t = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), t);
    if (ec != std::errc{} || ptr != value.data() + value.size())
      throw ValidationError("filter", "temperature must be numeric, got '" + value + "'");
    value = format_number(t);
  }
  terms_.emplace_back(f, std::move(value));
}

bool Filter::matches(const DocumentRecord& r) const {
  return std::all_of(terms_.begin(), terms_.end(), [&](const auto& term) {
    auto v = field_value(r, term.first);
    return v && *v == term.second;
  });
}

CorpusKey Filter::key() const {
  CorpusKey k;
  for (const auto& [f, v] : terms_) k.set(f, v);
  return k;
}

std::vector<std::vector<double>> Corpus::series() const {
  std::vector<std::vector<double>> out;
  out.reserve(documents.size());
  for (const auto& d : documents) out.push_back(d.scores);
  return out;
}

std::vector<Corpus> group_by_key(const std::vector<DocumentRecord>& records) {
  std::map<CorpusKey, Corpus> groups;
  for (const auto& r : records) {
    auto key = full_key(r);
    auto& c = groups[key];
    c.key = key;
    c.documents.push_back(r);
  }
  std::vector<Corpus> out;
  out.reserve(groups.size());
  for (auto& [k, c] : groups) out.push_back(std::move(c));
  return out;
}

}  // namespace lmfractal
