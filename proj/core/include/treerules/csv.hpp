#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace treerules::csv {

using Record = std::vector<std::string>;

/// Streaming RFC-4180 reader. Quoted fields may contain separators, doubled
/// quotes and line breaks. Tracks the physical line where each record starts.
class Reader {
 public:
  explicit Reader(std::istream& in, char separator = ',');

  /// Reads the next record; std::nullopt at end of input.
  std::optional<Record> next();

  /// 1-based line number of the record last returned by next().
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  char separator_;
  std::size_t physical_line_ = 1;
  std::size_t record_line_ = 0;
};

/// Splits a single line (no embedded line breaks) into fields.
Record parse_line(std::string_view line, char separator = ',');

/// Quotes a field when it contains the separator, a quote, or a line break.
std::string escape(std::string_view field, char separator = ',');

std::string join(const Record& fields, char separator = ',');

}  // namespace treerules::csv
