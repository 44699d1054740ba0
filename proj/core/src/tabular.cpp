#include "sstem/tabular.hpp"

#include <unistd.h>

#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sstem/error.hpp"

namespace sstem {

namespace fs = std::filesystem;

int CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

namespace {

void append_field(std::string& out, std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.push_back(',');
    append_field(out, row[i]);
  }
  out.push_back('\n');
}

}  // namespace

std::string write_csv(const CsvTable& table) {
  std::string out;
  append_row(out, table.header);
  for (const auto& r : table.rows) append_row(out, r);
  return out;
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_row = [&] {
    const bool blank = row.empty() && !field_started && field.empty();
    if (!blank) {
      row.push_back(std::move(field));
      records.push_back(std::move(row));
    }
    row.clear();
    field.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kParseError, "csv: unterminated quoted field");
  end_row();

  CsvTable t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].size() != t.header.size()) {
      throw Error(ErrorCode::kParseError, "csv: row " + std::to_string(i) + " has " +
                                              std::to_string(records[i].size()) + " fields, header has " +
                                              std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[i]));
  }
  return t;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

std::string format_fixed(double value, int decimals) {
  std::array<char, 64> buf{};
  // Avoid rendering "-0.000000".
  if (value == 0.0) value = 0.0;
  const int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  std::string out(buf.data(), static_cast<std::size_t>(n));
  if (out.starts_with('-') && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw Error(ErrorCode::kParseError, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

namespace {

std::int64_t parse_int(std::string_view text) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kParseError, "not an integer: '" + std::string(text) + "'");
  }
  return v;
}

int require_column(const CsvTable& t, std::string_view name, std::string_view what) {
  const int c = t.column(name);
  if (c < 0) throw Error(ErrorCode::kParseError, std::string(what) + ": missing column '" + std::string(name) + "'");
  return c;
}

}  // namespace

std::string write_scores_csv(const std::vector<ScoreRow>& rows) {
  CsvTable t;
  t.header = {"video_id", "model_name", "s_similarity", "s_object", "s_temporal", "n_frames", "stride"};
  for (const auto& r : rows) {
    t.rows.push_back({r.scores.video_id, r.model_name, format_double(r.scores.s_similarity),
                      format_double(r.scores.s_object), format_double(r.scores.s_temporal),
                      std::to_string(r.scores.n_frames), std::to_string(r.stride)});
  }
  return write_csv(t);
}

std::vector<ScoreRow> parse_scores_csv(std::string_view text) {
  const auto t = parse_csv(text);
  const int id = require_column(t, "video_id", "scores");
  const int model = require_column(t, "model_name", "scores");
  const int sim = require_column(t, "s_similarity", "scores");
  const int obj = require_column(t, "s_object", "scores");
  const int tmp = require_column(t, "s_temporal", "scores");
  const int nf = t.column("n_frames");
  const int st = t.column("stride");
  std::vector<ScoreRow> out;
  for (const auto& r : t.rows) {
    ScoreRow row;
    row.scores.video_id = r[id];
    row.model_name = r[model];
    row.scores.s_similarity = parse_double(r[sim]);
    row.scores.s_object = parse_double(r[obj]);
    row.scores.s_temporal = parse_double(r[tmp]);
    row.scores.n_frames = nf >= 0 ? parse_int(r[nf]) : 0;
    row.stride = st >= 0 ? static_cast<int>(parse_int(r[st])) : 1;
    out.push_back(std::move(row));
  }
  return out;
}

std::string write_human_csv(const std::vector<HumanScore>& rows) {
  CsvTable t;
  t.header = {"video_id", "mean_normalized", "n_raters"};
  for (const auto& r : rows) {
    t.rows.push_back({r.video_id, format_double(r.mean_normalized), std::to_string(r.n_raters)});
  }
  return write_csv(t);
}

std::vector<HumanScore> parse_human_csv(std::string_view text) {
  const auto t = parse_csv(text);
  if (t.header.empty()) throw Error(ErrorCode::kParseError, "human scores: empty file");
  int id = t.column("video_id");
  if (id < 0) id = 0;
  const int mean = require_column(t, "mean_normalized", "human scores");
  const int nr = t.column("n_raters");
  std::vector<HumanScore> out;
  for (const auto& r : t.rows) {
    out.push_back({r[id], parse_double(r[mean]), nr >= 0 ? parse_int(r[nr]) : 0});
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  static std::atomic<std::uint64_t> counter{0};
  const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const auto tmp = dir / ("." + path.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                          std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string());
  }
}

}  // namespace sstem
