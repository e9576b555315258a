#pragma once

#include <array>
#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmfractal {

// `synthetic` marks documents produced by the oracle generators.
enum class Source { human, llm, synthetic };
enum class GeneratorKind { pretrained, instruction_tuned };

std::string_view to_string(Source s);
std::string_view to_string(GeneratorKind k);
std::optional<Source> parse_source(std::string_view s);
std::optional<GeneratorKind> parse_generator_kind(std::string_view s);

/// The seven prompting-method abbreviations, least to most informative.
inline constexpr std::array<std::string_view, 7> kPromptMethods = {
    "cont", "cot", "kw", "kw+", "su", "su+", "exc"};

bool is_prompt_method(std::string_view label);

/// Shortest round-trippable decimal rendering ("0.5", "1", "1e-05").
std::string format_number(double v);

/// One scored document. Scores are per-token log-perplexities in nats.
struct DocumentRecord {
  std::string id;
  Source source = Source::human;
  std::optional<std::string> generator_model;
  std::optional<GeneratorKind> generator_kind;
  std::string scoring_model;
  std::string domain;
  std::optional<std::string> prompt_method;
  std::optional<double> temperature;
  std::optional<std::string> quality_text;
  std::optional<int> quality_rating;
  std::optional<std::string> pair_id;
  std::vector<double> scores;

  bool operator==(const DocumentRecord&) const = default;
};

/// Throws ValidationError naming the offending field.
void validate(const DocumentRecord& r);

/// Metadata fields that identify an experimental setting.
enum class KeyField {
  source,
  scoring_model,
  generator_model,
  generator_kind,
  temperature,
  prompt_method,
  domain,
};

inline constexpr std::array<KeyField, 7> kKeyFields = {
    KeyField::source,      KeyField::scoring_model, KeyField::generator_model,
    KeyField::generator_kind, KeyField::temperature, KeyField::prompt_method,
    KeyField::domain};

std::string_view to_string(KeyField f);
/// Accepts canonical names plus the short aliases prompt, model, temp,
/// scorer and kind. Returns nullopt for anything else.
std::optional<KeyField> parse_key_field(std::string_view name);

/// Value of a metadata field rendered as text; nullopt when absent.
std::optional<std::string> field_value(const DocumentRecord& r, KeyField f);

/// A setting: the subset of metadata fields that are fixed. Unset fields
/// are free. Ordering is lexicographic over kKeyFields with unset first.
struct CorpusKey {
  std::array<std::optional<std::string>, kKeyFields.size()> values{};

  const std::optional<std::string>& get(KeyField f) const {
    return values[static_cast<std::size_t>(f)];
  }
  void set(KeyField f, std::optional<std::string> v) {
    values[static_cast<std::size_t>(f)] = std::move(v);
  }
  bool empty() const;
  /// "field=value;field=value" over the fixed fields, or "*" when empty.
  std::string label() const;

  auto operator<=>(const CorpusKey&) const = default;
  bool operator==(const CorpusKey&) const = default;
};

/// Key with every field of the record fixed.
CorpusKey full_key(const DocumentRecord& r);
/// Key restricted to the given fields.
CorpusKey project_key(const CorpusKey& key, const std::vector<KeyField>& fields);

/// Conjunction of field=value constraints.
class Filter {
 public:
  Filter() = default;
  /// Parses "key=value" terms; unknown keys raise ValidationError.
  static Filter parse(const std::vector<std::string>& terms);

  void add(KeyField f, std::string value);
  bool matches(const DocumentRecord& r) const;
  /// Key whose fixed fields are exactly the filter's constrained fields.
  CorpusKey key() const;
  bool empty() const { return terms_.empty(); }
  const std::vector<std::pair<KeyField, std::string>>& terms() const { return terms_; }

 private:
  std::vector<std::pair<KeyField, std::string>> terms_;
};

/// Documents sharing an experimental setting. Treated as immutable once built.
struct Corpus {
  CorpusKey key;
  std::vector<DocumentRecord> documents;

  std::size_t size() const { return documents.size(); }
  bool empty() const { return documents.empty(); }
  /// Score sequences in document order.
  std::vector<std::vector<double>> series() const;
};

/// Splits records by full key, preserving file order within each group.
/// Groups are returned sorted by key.
std::vector<Corpus> group_by_key(const std::vector<DocumentRecord>& records);

}  // namespace lmfractal
