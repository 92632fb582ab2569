#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "note_forge/error.hpp"

// Small TOML subset: [table] / [a.b] headers, bare or dotted keys, basic and
// literal strings, integers, floats, booleans and (possibly multi-line) arrays.
// Inline tables, dates and multi-line strings are not supported.
namespace note_forge::toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<bool, std::int64_t, double, std::string, Array> data;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_integer() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  bool operator==(const Value&) const = default;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("toml line " + std::to_string(line) + ": " + what) {}
};

// Flattened document: keys are fully dotted ("dpo.beta").
class Document {
 public:
  const std::map<std::string, Value>& values() const { return values_; }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  const Value* find(const std::string& key) const;
  void set(const std::string& key, Value value) { values_[key] = std::move(value); }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<std::int64_t> get_integer(const std::string& key) const;
  // Integers are widened.
  std::optional<double> get_number(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_string_array(const std::string& key) const;

 private:
  std::map<std::string, Value> values_;
};

Document parse(std::string_view text);
// Parses a single value literal (used for CLI overrides such as beta=0.05).
Value parse_value(std::string_view literal);
std::string format_value(const Value& value);
std::string quote(std::string_view s);

}  // namespace note_forge::toml
