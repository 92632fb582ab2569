#include "note_forge/toml.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "note_forge/strings.hpp"

namespace note_forge::toml {

namespace {

class Cursor {
 public:
  Cursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        if (c == '\n') ++line_;
        ++pos_;
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  std::size_t line() const { return line_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

  Value value() {
    skip_space();
    const char c = peek();
    if (c == '"') return {basic_string()};
    if (c == '\'') return {literal_string()};
    if (c == '[') return {array()};
    return scalar();
  }

  std::string key() {
    skip_inline_space();
    std::string out;
    while (true) {
      if (peek() == '"') {
        out += basic_string();
      } else {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_' || text_[pos_] == '-')) {
          ++pos_;
        }
        if (start == pos_) fail("expected a key");
        out.append(text_.substr(start, pos_ - start));
      }
      skip_inline_space();
      if (peek() != '.') break;
      ++pos_;
      out.push_back('.');
      skip_inline_space();
    }
    return out;
  }

  void expect(char c) {
    skip_inline_space();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  void skip_inline_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  // Only a comment or the end of line may follow a value.
  void finish_line() {
    skip_inline_space();
    if (peek() == '#') {
      while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    }
    if (peek() == '\r') ++pos_;
    if (!at_end() && peek() != '\n') fail("unexpected trailing characters");
  }

 private:
  std::string basic_string() {
    ++pos_;
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string");
      const char c = text_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      if (at_end()) fail("bad escape");
      const char e = text_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        case 'u': {
          if (pos_ + 4 > text_.size()) fail("bad unicode escape");
          unsigned cp = 0;
          auto [p, ec] = std::from_chars(text_.data() + pos_, text_.data() + pos_ + 4, cp, 16);
          if (ec != std::errc{} || p != text_.data() + pos_ + 4) fail("bad unicode escape");
          pos_ += 4;
          if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
          } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          } else {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          }
          break;
        }
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    ++pos_;
    const std::size_t end = text_.find('\'', pos_);
    if (end == std::string_view::npos || text_.substr(pos_, end - pos_).find('\n') != std::string_view::npos) {
      fail("unterminated literal string");
    }
    std::string out(text_.substr(pos_, end - pos_));
    pos_ = end + 1;
    return out;
  }

  Array array() {
    ++pos_;
    Array out;
    while (true) {
      skip_space();
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_space();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() != ']') fail("expected ',' or ']' in array");
    }
  }

  Value scalar() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '#' &&
           text_[pos_] != '\n' && text_[pos_] != '\r' && text_[pos_] != ' ' && text_[pos_] != '\t') {
      ++pos_;
    }
    std::string token(text_.substr(start, pos_ - start));
    if (token.empty()) fail("expected a value");
    if (token == "true") return {true};
    if (token == "false") return {false};
    std::string digits;
    for (char c : token) {
      if (c != '_') digits.push_back(c);
    }
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" ||
                          digits == "+inf" || digits == "-inf" || digits == "nan";
    const char* b = digits.data();
    const char* e = b + digits.size();
    if (!digits.empty() && digits.front() == '+') ++b;
    if (is_float) {
      double d = 0;
      auto [p, ec] = std::from_chars(b, e, d);
      if (ec != std::errc{} || p != e) fail("bad number '" + token + "'");
      return {d};
    }
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(b, e, i);
    if (ec != std::errc{} || p != e) fail("bad value '" + token + "'");
    return {i};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

}  // namespace

const Value* Document::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

std::optional<std::string> Document::get_string(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (!v->is_string()) throw ValidationError(key + " must be a string");
  return std::get<std::string>(v->data);
}

std::optional<std::int64_t> Document::get_integer(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (!v->is_integer()) throw ValidationError(key + " must be an integer");
  return std::get<std::int64_t>(v->data);
}

std::optional<double> Document::get_number(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (v->is_integer()) return static_cast<double>(std::get<std::int64_t>(v->data));
  if (!v->is_float()) throw ValidationError(key + " must be a number");
  return std::get<double>(v->data);
}

std::optional<bool> Document::get_bool(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (!v->is_bool()) throw ValidationError(key + " must be a boolean");
  return std::get<bool>(v->data);
}

std::optional<std::vector<std::string>> Document::get_string_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return std::nullopt;
  if (!v->is_array()) throw ValidationError(key + " must be an array of strings");
  std::vector<std::string> out;
  for (const Value& item : std::get<Array>(v->data)) {
    if (!item.is_string()) throw ValidationError(key + " must be an array of strings");
    out.push_back(std::get<std::string>(item.data));
  }
  return out;
}

Document parse(std::string_view text) {
  Document doc;
  std::string table;
  Cursor cur(text, 1);
  while (true) {
    cur.skip_space();
    if (cur.at_end()) break;
    if (cur.peek() == '[') {
      cur.expect('[');
      table = cur.key();
      cur.expect(']');
      cur.finish_line();
      continue;
    }
    const std::size_t line = cur.line();
    std::string key = cur.key();
    cur.expect('=');
    Value v = cur.value();
    cur.finish_line();
    std::string full = table.empty() ? key : table + "." + key;
    if (doc.contains(full)) throw ParseError(line, "duplicate key " + full);
    doc.set(full, std::move(v));
  }
  return doc;
}

Value parse_value(std::string_view literal) {
  const std::string_view t = trim(literal);
  Cursor cur(t, 1);
  Value v = cur.value();
  cur.finish_line();
  if (!cur.at_end()) throw ValidationError("bad value literal '" + std::string(t) + "'");
  return v;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  out.push_back('"');
  return out;
}

std::string format_value(const Value& value) {
  struct Visitor {
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(double d) const {
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, d);
      std::string s(buf, p);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    std::string operator()(const std::string& s) const { return quote(s); }
    std::string operator()(const Array& a) const {
      std::string out = "[";
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) out += ", ";
        out += format_value(a[i]);
      }
      return out + "]";
    }
  };
  return std::visit(Visitor{}, value.data);
}

}  // namespace note_forge::toml
