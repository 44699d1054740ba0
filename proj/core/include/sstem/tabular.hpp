#pragma once

// Comma-separated files exchanged between pipeline steps, and atomic file
// output. Numeric fields are written in shortest round-trip form, so a
// write/read cycle reproduces every double exactly.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sstem/model.hpp"

namespace sstem {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

// RFC 4180 style: fields containing ',', '"' or newlines are quoted and
// embedded quotes doubled. Rows end with '\n'.
std::string write_csv(const CsvTable& table);
// Throws kParseError on ragged rows or unterminated quotes. Blank lines are
// skipped.
CsvTable parse_csv(std::string_view text);

std::string format_double(double value);        // shortest round-trip
std::string format_fixed(double value, int decimals);
double parse_double(std::string_view text);    // throws kParseError

// One scored video, as exported by the scoring step.
struct ScoreRow {
  StageScores scores;
  std::string model_name;
  int stride = 1;

  bool operator==(const ScoreRow&) const = default;
};

// Header: video_id,model_name,s_similarity,s_object,s_temporal,n_frames,stride
std::string write_scores_csv(const std::vector<ScoreRow>& rows);
std::vector<ScoreRow> parse_scores_csv(std::string_view text);

// Per-video human aggregate as consumed by weight fitting.
struct HumanScore {
  std::string video_id;
  double mean_normalized = 0.0;
  std::int64_t n_raters = 0;  // 0 when the source does not say

  bool operator==(const HumanScore&) const = default;
};

// Header: video_id,mean_normalized,n_raters
std::string write_human_csv(const std::vector<HumanScore>& rows);
// Requires a mean_normalized column; n_raters is optional. The id column is
// "video_id" if present, otherwise the first column.
std::vector<HumanScore> parse_human_csv(std::string_view text);

std::string read_file(const std::filesystem::path& path);  // throws kIoError
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace sstem
