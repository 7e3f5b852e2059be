#pragma once

// Deterministic artifact emission: CSV at 15 significant digits with LF line
// endings, and atomic write-then-rename so no partial file is ever visible.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace t3k::cli {

inline std::string csv_number(double v) { return fmt::format("{:.15g}", v); }

inline std::string csv_optional(const std::optional<double>& v) {
  return v ? csv_number(*v) : std::string();
}

class CsvWriter {
 public:
  explicit CsvWriter(std::string preamble = {}) : text_(std::move(preamble)) {}

  CsvWriter& header(const std::vector<std::string>& cols) { return row(cols); }

  CsvWriter& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += cells[i];
    }
    text_ += '\n';
    ++rows_;
    return *this;
  }

  CsvWriter& row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(csv_number(v));
    return row(s);
  }

  const std::string& text() const { return text_; }
  std::size_t data_rows() const { return rows_ > 0 ? rows_ - 1 : 0; }

 private:
  std::string text_;
  std::size_t rows_ = 0;
};

struct Artifact {
  std::string name;  ///< file name relative to the output directory
  std::string content;
};

/// Writes `content` to `path` via a sibling temporary and a rename.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) {
      os.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string());
  }
}

}  // namespace t3k::cli
