#pragma once

// CSV and JSON artifacts. Every file is written to a temporary sibling and
// renamed into place. CSVs start with a provenance comment line, then the
// header row; numbers use 17 significant digits and LF line endings.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "apkin/errors.hpp"

namespace apkin {

inline constexpr const char* kVersion = "apkin-1.0.0";

inline std::string provenance_line(std::uint64_t config_hash) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "# config_hash=0x%016" PRIx64 " version=%s", config_hash, kVersion);
  return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

class CsvTable {
 public:
  using Cell = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != header_.size())
      throw InvalidArgument("csv row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(header_.size()));
    rows_.push_back(std::move(row));
  }

  std::size_t rows() const noexcept { return rows_.size(); }

  std::string str(std::uint64_t config_hash) const {
    std::string out = provenance_line(config_hash) + "\n";
    append_line(out, header_);
    for (const auto& row : rows_) {
      std::vector<std::string> cells;
      cells.reserve(row.size());
      for (const Cell& c : row) cells.push_back(format(c));
      append_line(out, cells);
    }
    return out;
  }

  void write(const std::filesystem::path& path, std::uint64_t config_hash) const {
    write_atomic(path, str(config_hash));
  }

  static std::string format(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", *d);
      return buf;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
    if (const auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
    if (const bool* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    return std::get<std::string>(c);
  }

 private:
  static void append_line(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

}  // namespace apkin
