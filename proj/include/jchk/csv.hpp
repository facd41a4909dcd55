#pragma once

// Self-describing CSV: a block of '#'-prefixed metadata lines, one header
// line, then rows. Numbers are written locale-free with 17 significant digits
// so that every value parses back to the identical double.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace jchk::csv {

std::string format_double(double value);
double parse_double(std::string_view text);

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);

  void add_metadata(std::string_view key, std::string_view value);

  /// Cells must match the header width.
  void add_row(std::vector<std::string> cells);

  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> metadata_;
  std::string body_;
};

struct Table {
  std::vector<std::string> metadata;  ///< comment lines without the leading "# "
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws InvalidArgument for an unknown column.
  std::size_t column(std::string_view name) const;
};

Table parse(std::string_view text);

/// Writes the whole file or nothing: the content goes to a sibling temporary
/// which is then renamed. Throws IoError naming the path.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace jchk::csv
