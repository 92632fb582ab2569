#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace note_forge::csv {

// One logical CSV record. `row` is the 1-based data-row number (header excluded);
// `line` is the physical line the record starts on.
struct Record {
  std::size_t row = 0;
  std::size_t line = 0;
  std::vector<std::string> fields;
  std::optional<std::string> error;
};

struct Document {
  std::vector<std::string> header;
  std::vector<Record> records;
};

// RFC 4180 reader: comma delimiter, double-quote quoting with "" escapes, quoted fields
// may span lines. Malformed records come back with `error` set and are never dropped.
// Entirely empty lines are skipped.
Document parse(std::string_view text);

std::string escape_field(std::string_view field);
std::string format_row(const std::vector<std::string>& fields);

}  // namespace note_forge::csv
