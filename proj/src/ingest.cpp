#include "lmfractal/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "lmfractal/errors.hpp"

namespace lmfractal {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parse_json_object(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line.begin(), line.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "expected a JSON object");
  return j;
}

bool present(const json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && !it->is_null();
}

std::string require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw ValidationError(key, "missing required field");
  if (!it->is_string()) throw ValidationError(key, "must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& j, const char* key) {
  if (!present(j, key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ValidationError(key, "must be a string");
  return v.get<std::string>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!present(j, key)) return std::nullopt;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ValidationError(key, "must be a number");
  return v.get<double>();
}

std::vector<double> require_scores(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw ValidationError(key, "missing required field");
  if (!it->is_array()) throw ValidationError(key, "must be an array of numbers");
  std::vector<double> out;
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number())
      throw ValidationError(key, "non-numeric value at index " + std::to_string(i));
    double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(key, "non-finite value at index " + std::to_string(i));
    out.push_back(d);
  }
  if (out.empty()) throw ValidationError(key, "must be non-empty");
  return out;
}

const std::set<std::string, std::less<>> kCanonicalKeys = {
    "id",          "source",       "generator_model", "generator_kind",
    "scoring_model", "domain",     "prompt_method",   "temperature",
    "quality_text", "quality_rating", "pair_id",      "scores"};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

}  // namespace

DocumentRecord parse_canonical_record(std::string_view line, std::size_t line_no) {
  auto j = parse_json_object(line, line_no);
  for (const auto& [key, value] : j.items()) {
    if (!kCanonicalKeys.contains(key)) throw ValidationError(key, "unknown field");
  }
  DocumentRecord r;
  r.id = require_string(j, "id");
  auto source = require_string(j, "source");
  auto parsed_source = parse_source(source);
  if (!parsed_source) throw ValidationError("source", "must be 'human', 'llm' or 'synthetic', got '" + source + "'");
  r.source = *parsed_source;
  r.generator_model = optional_string(j, "generator_model");
  if (auto kind = optional_string(j, "generator_kind")) {
    auto k = parse_generator_kind(*kind);
    if (!k) throw ValidationError("generator_kind", "must be 'pretrained' or 'instruction_tuned'");
    r.generator_kind = *k;
  }
  r.scoring_model = require_string(j, "scoring_model");
  r.domain = require_string(j, "domain");
  r.prompt_method = optional_string(j, "prompt_method");
  r.temperature = optional_number(j, "temperature");
  r.quality_text = optional_string(j, "quality_text");
  if (present(j, "quality_rating")) {
    const auto& q = j.at("quality_rating");
    if (!q.is_number_integer()) throw ValidationError("quality_rating", "must be an integer");
    r.quality_rating = q.get<int>();
  }
  r.pair_id = optional_string(j, "pair_id");
  r.scores = require_scores(j, "scores");
  validate(r);
  return r;
}

std::pair<std::string, std::optional<GeneratorKind>> normalize_prompt_label(std::string_view label) {
  auto l = collapse_spaces(lower(label));
  // "summary + keywords" and "summary+keywords" compare equal once spaces
  // around '+' are removed.
  std::string compact;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (l[i] == ' ' && ((i + 1 < l.size() && l[i + 1] == '+') || (i > 0 && l[i - 1] == '+'))) continue;
    compact += l[i];
  }
  using GK = GeneratorKind;
  if (compact == "continue (pt)") return {"cont", GK::pretrained};
  if (compact == "continue (it)") return {"cont", GK::instruction_tuned};
  if (compact == "continue" || compact == "cont") return {"cont", std::nullopt};
  if (compact == "cot" || compact == "chain-of-thought") return {"cot", GK::instruction_tuned};
  if (compact == "short keywords" || compact == "kw") return {"kw", GK::instruction_tuned};
  if (compact == "keywords" || compact == "kw+") return {"kw+", GK::instruction_tuned};
  if (compact == "summary" || compact == "su") return {"su", GK::instruction_tuned};
  if (compact == "summary+keywords" || compact == "su+") return {"su+", GK::instruction_tuned};
  if (compact == "excerpt" || compact == "exc") return {"exc", GK::instruction_tuned};
  throw ValidationError(
      "Prompt", "unknown prompt label '" + std::string(label) +
                    "' (accepted: continue (pt), continue (it), cot, short keywords, keywords, "
                    "summary, summary + keywords, excerpt, or cont, cot, kw, kw+, su, su+, exc)");
}

int parse_quality_rating(std::string_view text) {
  auto end = text.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos) throw ExtractionError("empty quality text");
  auto trimmed = text.substr(0, end + 1);
  auto line_start = trimmed.find_last_of('\n');
  auto last_line = line_start == std::string_view::npos ? trimmed : trimmed.substr(line_start + 1);

  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  // Out-of-five form: "3/5" or "3 / 5".
  if (last_line.size() >= 3 && last_line.back() == '5') {
    auto slash = last_line.find_last_not_of(" \t", last_line.size() - 2);
    if (slash != std::string_view::npos && last_line[slash] == '/') {
      auto digit = last_line.find_last_not_of(" \t", slash == 0 ? 0 : slash - 1);
      if (slash > 0 && digit != std::string_view::npos && is_digit(last_line[digit])) {
        int v = last_line[digit] - '0';
        if (v >= 1 && v <= 5) return v;
      }
    }
  }
  for (auto it = last_line.rbegin(); it != last_line.rend(); ++it) {
    if (is_digit(*it)) {
      int v = *it - '0';
      if (v >= 1 && v <= 5) return v;
      throw ExtractionError("trailing digit " + std::string(1, *it) + " is outside 1..5");
    }
  }
  throw ExtractionError("no rating digit found");
}

DocumentRecord parse_gagle_record(std::string_view line, std::size_t line_no) {
  auto j = parse_json_object(line, line_no);
  DocumentRecord r;
  auto article_id = require_string(j, "ID");
  auto model = require_string(j, "Model");
  r.domain = lower(require_string(j, "Domain"));
  r.scoring_model = optional_string(j, "Scoring Model").value_or("unspecified");
  r.scores = require_scores(j, "Log-Perplexity Scores");
  r.pair_id = article_id;

  auto model_l = lower(model);
  if (model_l == "human" || model_l == "ground-truth" || model_l == "ground truth") {
    r.source = Source::human;
    r.id = article_id;
  } else {
    r.source = Source::llm;
    r.generator_model = model;
    auto prompt = require_string(j, "Prompt");
    auto [method, kind] = normalize_prompt_label(prompt);
    r.prompt_method = method;
    r.generator_kind = kind;
    r.temperature = optional_number(j, "Temperature");
    r.id = article_id + "|" + model + "|" + method;
    if (r.generator_kind) r.id += "|" + std::string(to_string(*r.generator_kind));
    if (r.temperature) r.id += "|t=" + format_number(*r.temperature);
  }
  if (auto quality = optional_string(j, "Quality")) {
    r.quality_text = quality;
    try {
      r.quality_rating = parse_quality_rating(*quality);
    } catch (const ExtractionError&) {
      // Rating stays absent; the text is kept.
    }
  }
  validate(r);
  return r;
}

std::string to_canonical_json(const DocumentRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["source"] = std::string(to_string(r.source));
  if (r.generator_model) j["generator_model"] = *r.generator_model;
  if (r.generator_kind) j["generator_kind"] = std::string(to_string(*r.generator_kind));
  j["scoring_model"] = r.scoring_model;
  j["domain"] = r.domain;
  if (r.prompt_method) j["prompt_method"] = *r.prompt_method;
  if (r.temperature) j["temperature"] = *r.temperature;
  if (r.quality_text) j["quality_text"] = *r.quality_text;
  if (r.quality_rating) j["quality_rating"] = *r.quality_rating;
  if (r.pair_id) j["pair_id"] = *r.pair_id;
  j["scores"] = r.scores;
  return j.dump();
}

LoadedRecords read_records(const std::filesystem::path& path, InputFormat format, bool strict) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  LoadedRecords out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++out.summary.read;
    try {
      out.records.push_back(format == InputFormat::canonical ? parse_canonical_record(line, line_no)
                                                             : parse_gagle_record(line, line_no));
      ++out.summary.kept;
    } catch (const ParseError&) {
      if (strict) throw;
      ++out.summary.rejected;
      ++out.summary.rejection_reasons["malformed_json"];
    } catch (const ValidationError& e) {
      if (strict) throw ParseError(line_no, e.what());
      ++out.summary.rejected;
      ++out.summary.rejection_reasons["invalid_" + e.field()];
    }
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& path, const Filter& filter) {
  auto loaded = read_records(path, InputFormat::canonical, true);
  Corpus corpus;
  corpus.key = filter.key();
  std::set<std::string, std::less<>> ids;
  std::set<CorpusKey> seen;
  for (auto& r : loaded.records) {
    if (!filter.matches(r)) {
      seen.insert(full_key(r));
      continue;
    }
    if (!ids.insert(r.id).second) throw ValidationError("id", "duplicate id '" + r.id + "' in corpus");
    corpus.documents.push_back(std::move(r));
  }
  if (corpus.empty()) {
    std::vector<std::string> available;
    for (const auto& k : seen) available.push_back(k.label());
    throw EmptySelectionError("no documents in " + path.string() + " match " + corpus.key.label(),
                              std::move(available));
  }
  return corpus;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_records(const std::vector<DocumentRecord>& records, const std::filesystem::path& path) {
  std::string text;
  for (const auto& r : records) {
    text += to_canonical_json(r);
    text += '\n';
  }
  write_text_file(path, text);
}

void write_results(const AnalysisTable& table, const std::filesystem::path& path) {
  write_text_file(path, table.to_csv());
}

}  // namespace lmfractal
