#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lmfractal/analysis.hpp"

namespace lmfractal {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitEmptySelection = 2;

/// Entry point of the `lmfractal` executable.
int run_cli(int argc, char** argv);
/// Same, with arguments (excluding the program name) and captured streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Wide per-setting CSV: one line per SettingRow, key fields spelled out,
/// bootstrap replicates ';'-joined. Numbers round-trip exactly.
std::string settings_csv(const std::vector<SettingRow>& rows);
std::vector<SettingRow> parse_settings_csv(std::string_view text);

/// Per-scale points and fit lines behind every estimate in `rows`.
std::string diagnostics_csv(const std::vector<SettingRow>& rows);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace lmfractal
