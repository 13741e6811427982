#include "treerules/csv.hpp"

#include <istream>
#include <sstream>

#include "treerules/error.hpp"

namespace treerules::csv {

Reader::Reader(std::istream& in, char separator) : in_(in), separator_(separator) {}

std::optional<Record> Reader::next() {
  if (!in_ || in_.peek() == std::char_traits<char>::eof()) {
    return std::nullopt;
  }
  record_line_ = physical_line_;

  Record record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;

  for (;;) {
    const int c = in_.get();
    if (c == std::char_traits<char>::eof()) {
      if (in_quotes) {
        throw ParseError("unterminated quoted field", record_line_);
      }
      break;
    }
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in_.peek() == '"') {
          in_.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++physical_line_;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      if (!field.empty() || field_was_quoted) {
        throw ParseError("unexpected quote inside unquoted field", record_line_);
      }
      in_quotes = true;
      field_was_quoted = true;
    } else if (ch == separator_) {
      record.push_back(std::move(field));
      field.clear();
      field_was_quoted = false;
    } else if (ch == '\r') {
      if (in_.peek() == '\n') continue;
      ++physical_line_;
      break;
    } else if (ch == '\n') {
      ++physical_line_;
      break;
    } else {
      if (field_was_quoted) {
        throw ParseError("characters after closing quote", record_line_);
      }
      field.push_back(ch);
    }
  }
  record.push_back(std::move(field));
  return record;
}

Record parse_line(std::string_view line, char separator) {
  std::string copy(line);
  std::istringstream in(copy);
  Reader reader(in, separator);
  auto record = reader.next();
  return record ? std::move(*record) : Record{std::string{}};
}

std::string escape(std::string_view field, char separator) {
  const bool needs_quotes = field.find_first_of(std::string{separator, '"', '\n', '\r'}) !=
                            std::string_view::npos;
  if (!needs_quotes) return std::string(field);
  std::string out;
  out.reserve(field.size() + 2);
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const Record& fields, char separator) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) out.push_back(separator);
    out += escape(fields[i], separator);
  }
  return out;
}

}  // namespace treerules::csv
