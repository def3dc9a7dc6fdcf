#include "revinsight/csv.hpp"

#include <ostream>

namespace revinsight::csv {

Reader::Reader(std::string_view data, char separator)
    : data_(data), sep_(separator) {
  if (data_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
}

void Reader::skip_to_line_end() {
  while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
  if (pos_ < data_.size()) {
    ++pos_;
    ++line_;
  }
}

std::optional<Record> Reader::next() {
  // Blank lines between records are not records.
  while (pos_ < data_.size() &&
         (data_[pos_] == '\n' || (data_[pos_] == '\r' && pos_ + 1 < data_.size() &&
                                  data_[pos_ + 1] == '\n'))) {
    pos_ += data_[pos_] == '\r' ? 2 : 1;
    ++line_;
  }
  if (pos_ >= data_.size()) return std::nullopt;

  Record rec;
  rec.line = line_;
  std::string field;
  bool quoted = false;
  bool after_quote = false;  // closing quote seen; only sep/EOL may follow
  bool at_field_start = true;

  while (pos_ < data_.size()) {
    char c = data_[pos_];
    if (quoted) {
      if (c == '"') {
        if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '"') {
          field.push_back('"');
          pos_ += 2;
          continue;
        }
        quoted = false;
        after_quote = true;
        ++pos_;
        continue;
      }
      if (c == '\n') ++line_;
      field.push_back(c);
      ++pos_;
      continue;
    }

    if (c == sep_) {
      rec.fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
      at_field_start = true;
      ++pos_;
      continue;
    }
    if (c == '\n' || (c == '\r' && (pos_ + 1 == data_.size() || data_[pos_ + 1] == '\n'))) {
      pos_ += (c == '\r' && pos_ + 1 < data_.size()) ? 2 : 1;
      ++line_;
      rec.fields.push_back(std::move(field));
      return rec;
    }
    if (after_quote) {
      rec.error = "unexpected character after closing quote";
      skip_to_line_end();
      return rec;
    }
    if (c == '"') {
      if (!at_field_start) {
        rec.error = "quote inside unquoted field";
        skip_to_line_end();
        return rec;
      }
      quoted = true;
      at_field_start = false;
      ++pos_;
      continue;
    }
    at_field_start = false;
    field.push_back(c);
    ++pos_;
  }

  if (quoted) {
    rec.error = "unterminated quoted field";
    return rec;
  }
  rec.fields.push_back(std::move(field));
  return rec;
}

std::string escape(std::string_view field, char separator) {
  bool needs_quotes = field.find_first_of("\"\r\n") != std::string_view::npos ||
                      field.find(separator) != std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields,
               char separator) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << separator;
    out << escape(fields[i], separator);
  }
  out << '\n';
}

}  // namespace revinsight::csv
