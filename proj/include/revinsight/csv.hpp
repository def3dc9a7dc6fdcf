#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revinsight::csv {

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::string error;     // non-empty when the record is malformed

  bool ok() const noexcept { return error.empty(); }
};

/// RFC-4180 reader over an in-memory buffer. Quoted fields may contain
/// separators, doubled quotes and line breaks; CRLF and LF both end a record.
/// A malformed record is returned with `error` set and the reader resyncs at
/// the next line break, so callers choose between failing and skipping.
class Reader {
 public:
  explicit Reader(std::string_view data, char separator = ',');

  std::optional<Record> next();

 private:
  void skip_to_line_end();

  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  char sep_;
};

/// Quotes the field when it contains the separator, a quote or a line break.
std::string escape(std::string_view field, char separator = ',');

/// Writes one record terminated by '\n'.
void write_row(std::ostream& out, const std::vector<std::string>& fields,
               char separator = ',');

}  // namespace revinsight::csv
