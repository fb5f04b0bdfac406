#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace sosim {

/// Renders a real with 17 significant digits ("%.17g"), enough to round-trip
/// any double.
std::string format_real(double v);

/// Per-tick samples of the registered reporters.
struct Series {
  std::vector<std::string> names;

  struct Row {
    std::int64_t tick = 0;
    std::vector<double> values;
    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;

  bool operator==(const Series&) const = default;
};

/// `tick,<name1>,<name2>,...` header then one row per tick, `\n` endings.
std::string to_csv(const Series& series);
void export_csv(const Series& series, const std::filesystem::path& destination);
Series parse_csv(std::string_view text);

/// Writes text to a file, throwing IoError when the destination is unwritable.
void write_text_file(const std::filesystem::path& destination, std::string_view text);
std::string read_text_file(const std::filesystem::path& source);

}  // namespace sosim
