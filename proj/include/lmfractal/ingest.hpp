#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lmfractal/record.hpp"
#include "lmfractal/table.hpp"

namespace lmfractal {

enum class InputFormat { canonical, gagle };

/// Parses one canonical JSONL line. `line_no` is only used in error text.
DocumentRecord parse_canonical_record(std::string_view line, std::size_t line_no = 1);

/// Parses one record laid out with the GAGLE data-card fields
/// (ID, Model, Domain, Prompt, Temperature, Prefix, Quality, Text,
/// Log-Perplexity Scores). A Model of "human" marks the ground-truth article.
DocumentRecord parse_gagle_record(std::string_view line, std::size_t line_no = 1);

/// Rating digit at the end of a quality response. "Rating: 3/5" yields 3.
/// Throws ExtractionError when no trailing digit in 1..5 exists.
int parse_quality_rating(std::string_view text);

/// Maps a GAGLE prompt label (or an abbreviation) to {abbreviation, kind}.
/// Throws ValidationError listing accepted labels for anything else.
std::pair<std::string, std::optional<GeneratorKind>> normalize_prompt_label(std::string_view label);

/// Single-line canonical JSON, keys in schema order, absent fields omitted.
std::string to_canonical_json(const DocumentRecord& r);

struct IngestSummary {
  std::size_t read = 0;
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> rejection_reasons;
};

struct LoadedRecords {
  std::vector<DocumentRecord> records;
  IngestSummary summary;
};

/// Reads a JSONL file. In strict mode the first bad line throws; otherwise
/// bad lines are tallied by reason and skipped. Blank lines are ignored.
LoadedRecords read_records(const std::filesystem::path& path, InputFormat format,
                           bool strict = true);

/// All canonical records matching `filter`, in file order. Throws IoError
/// when unreadable and EmptySelectionError when nothing matches.
Corpus load_corpus(const std::filesystem::path& path, const Filter& filter);

/// Writes records as canonical JSONL.
void write_records(const std::vector<DocumentRecord>& records, const std::filesystem::path& path);

/// Writes `table.to_csv()`; throws IoError when the path is not writable.
void write_results(const AnalysisTable& table, const std::filesystem::path& path);

/// Writes text to a file, throwing IoError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace lmfractal
