#pragma once

// Minimal RFC 4180 tables: comma separated, fields quoted only when they contain
// a comma, a quote or a line break, LF line endings, header row first.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mlp::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  friend bool operator==(const Table&, const Table&) = default;
};

std::string to_text(const Table& table);

/// Writes via a temporary file and a rename. Throws std::runtime_error on I/O failure.
void write(const std::filesystem::path& path, const Table& table);

/// Inverse of to_text. Throws std::invalid_argument on malformed input
/// (unterminated quote, rows whose width differs from the header).
Table parse(std::string_view text);
Table read(const std::filesystem::path& path);

}  // namespace mlp::csv
