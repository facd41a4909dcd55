#include "jchk/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <system_error>

#include "jchk/errors.hpp"

namespace jchk::csv {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc{}) throw InvalidArgument("cannot format value");
  return {buf.data(), end};
}

double parse_double(std::string_view text) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw InvalidArgument("not a number: '" + std::string(text) + "'");
  }
  return value;
}

Writer::Writer(std::vector<std::string> header) : header_(std::move(header)) {}

void Writer::add_metadata(std::string_view key, std::string_view value) {
  std::string line = "# ";
  line += key;
  line += " = ";
  line += value;
  metadata_.push_back(std::move(line));
}

void Writer::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw InvalidArgument("row width does not match header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i > 0) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
}

std::string Writer::str() const {
  std::string out;
  for (const auto& line : metadata_) {
    out += line;
    out += '\n';
  }
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i > 0) out += ',';
    out += header_[i];
  }
  out += '\n';
  out += body_;
  return out;
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InvalidArgument("no column named '" + std::string(name) + "'");
}

Table parse(std::string_view text) {
  Table table;
  bool have_header = false;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    if (line.front() == '#') {
      table.metadata.emplace_back(line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1));
    } else if (!have_header) {
      table.header = split(line);
      have_header = true;
    } else {
      table.rows.push_back(split(line));
      if (table.rows.back().size() != table.header.size()) throw InvalidArgument("ragged CSV row");
    }
  }
  if (!have_header) throw InvalidArgument("CSV has no header line");
  return table;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path parent = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::is_directory(parent, ec)) throw IoError("output directory does not exist: " + path.string());

  fs::path staging = path;
  staging += ".partial";
  {
    std::ofstream out(staging, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) {
      fs::remove(staging, ec);
      throw IoError("write failed: " + path.string());
    }
  }
  fs::rename(staging, path, ec);
  if (ec) {
    fs::remove(staging, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

}  // namespace jchk::csv
