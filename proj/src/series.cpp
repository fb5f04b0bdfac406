#include "sosim/series.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sosim/error.hpp"

namespace sosim {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const Series& series) {
  std::string out = "tick";
  for (const auto& n : series.names) {
    out += ',';
    out += n;
  }
  out += '\n';
  for (const auto& row : series.rows) {
    out += std::to_string(row.tick);
    for (double v : row.values) {
      out += ',';
      out += format_real(v);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& destination, std::string_view text) {
  std::ofstream f(destination, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + destination.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write to " + destination.string() + " failed");
}

std::string read_text_file(const std::filesystem::path& source) {
  std::ifstream f(source, std::ios::binary);
  if (!f) throw IoError("cannot open " + source.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void export_csv(const Series& series, const std::filesystem::path& destination) {
  write_text_file(destination, to_csv(series));
}

namespace {
std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    parts.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}
}  // namespace

Series parse_csv(std::string_view text) {
  Series s;
  bool header = true;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (header) {
      if (cells.empty() || cells[0] != "tick") throw IoError("csv: missing tick header");
      for (std::size_t i = 1; i < cells.size(); ++i) s.names.emplace_back(cells[i]);
      header = false;
      continue;
    }
    if (cells.size() != s.names.size() + 1)
      throw IoError("csv: wrong cell count on line " + std::to_string(line_no));
    Series::Row row;
    row.tick = std::stoll(std::string(cells[0]));
    for (std::size_t i = 1; i < cells.size(); ++i) row.values.push_back(std::stod(std::string(cells[i])));
    s.rows.push_back(std::move(row));
  }
  if (header) throw IoError("csv: empty input");
  return s;
}

}  // namespace sosim
