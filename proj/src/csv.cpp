#include "note_forge/csv.hpp"

namespace note_forge::csv {

namespace {

class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {
    if (text_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
  }

  bool done() const { return pos_ >= text_.size(); }

  // Reads one record starting at the current position.
  Record next() {
    Record rec;
    rec.line = line_;
    std::string field;
    bool quoted = false;
    bool after_quote = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (quoted) {
        ++pos_;
        if (c == '"') {
          if (pos_ < text_.size() && text_[pos_] == '"') {
            field.push_back('"');
            ++pos_;
          } else {
            quoted = false;
            after_quote = true;
          }
        } else {
          if (c == '\n') ++line_;
          field.push_back(c);
        }
        continue;
      }
      if (c == ',') {
        ++pos_;
        rec.fields.push_back(std::move(field));
        field.clear();
        after_quote = false;
        continue;
      }
      if (c == '\n' || c == '\r') {
        consume_newline();
        rec.fields.push_back(std::move(field));
        return rec;
      }
      if (after_quote) {
        rec.error = "unexpected character after closing quote";
        skip_line();
        return rec;
      }
      if (c == '"') {
        if (!field.empty()) {
          rec.error = "quote inside unquoted field";
          skip_line();
          return rec;
        }
        quoted = true;
        ++pos_;
        continue;
      }
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

  bool at_blank_line() const {
    return pos_ < text_.size() && (text_[pos_] == '\n' || text_[pos_] == '\r');
  }

  void consume_newline() {
    if (text_[pos_] == '\r') ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
    ++line_;
  }

 private:
  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r') ++pos_;
    if (pos_ < text_.size()) consume_newline();
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

}  // namespace

Document parse(std::string_view text) {
  Document doc;
  Scanner scanner(text);
  bool have_header = false;
  std::size_t row = 0;
  while (!scanner.done()) {
    if (scanner.at_blank_line()) {
      scanner.consume_newline();
      continue;
    }
    Record rec = scanner.next();
    if (!have_header) {
      doc.header = std::move(rec.fields);
      have_header = true;
      continue;
    }
    rec.row = ++row;
    doc.records.push_back(std::move(rec));
  }
  return doc;
}

std::string escape_field(std::string_view field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string_view::npos ||
                            (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += escape_field(fields[i]);
  }
  out.push_back('\n');
  return out;
}

}  // namespace note_forge::csv
