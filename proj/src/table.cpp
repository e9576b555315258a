#include "lmfractal/table.hpp"

#include <algorithm>

#include "lmfractal/errors.hpp"
#include "lmfractal/record.hpp"

namespace lmfractal {

bool is_registered_statistic(std::string_view name) {
  return std::find(kStatisticRegistry.begin(), kStatisticRegistry.end(), name) !=
         kStatisticRegistry.end();
}

void AnalysisTable::add(std::string group, std::string_view statistic, double value,
                        std::optional<double> stderr_value, std::size_t n) {
  if (!is_registered_statistic(statistic))
    throw ValidationError("statistic", "'" + std::string(statistic) + "' is not registered");
  rows_.push_back(TableRow{std::move(group), std::string(statistic), value, stderr_value, n});
}

void AnalysisTable::append(const AnalysisTable& other) {
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

const TableRow* AnalysisTable::find(std::string_view group, std::string_view statistic) const {
  for (const auto& r : rows_)
    if (r.group == group && r.statistic == statistic) return &r;
  return nullptr;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string AnalysisTable::to_csv() const {
  std::string out = "group_key,statistic,value,stderr,n_docs\n";
  for (const auto& r : rows_) {
    out += csv_escape(r.group);
    out += ',';
    out += r.statistic;
    out += ',';
    out += format_number(r.value);
    out += ',';
    if (r.stderr_value) out += format_number(*r.stderr_value);
    out += ',';
    out += std::to_string(r.n);
    out += '\n';
  }
  return out;
}

}  // namespace lmfractal
