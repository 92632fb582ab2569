#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace note_forge {

// Word-level tokens: lower-cased maximal runs of ASCII letters/digits (bytes >= 0x80
// count as letters so UTF-8 words stay whole). Everything else separates tokens.
class TokenSequence {
 public:
  TokenSequence() = default;
  // Throws ValidationError if any token is empty.
  explicit TokenSequence(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<std::string> tokens_;
};

TokenSequence tokenize(std::string_view text);

// Porter (1980) suffix-stripping stemmer over a lower-case ASCII word.
std::string porter_stem(std::string_view word);

}  // namespace note_forge
