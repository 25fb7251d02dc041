#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gradleak {

using TokenId = int;

inline constexpr TokenId kClsId = 0;
inline constexpr TokenId kPadId = 1;
inline constexpr TokenId kUnkId = 2;

struct TokenSequence {
  std::vector<TokenId> ids;
  int label = 0;
};

// Lowercase word-level tokenization: runs of letters, digits and apostrophes
// form words; every other non-space character is its own token.
std::vector<std::string> split_words(std::string_view text);

class Vocab {
 public:
  // Builds the vocabulary from corpus texts. Word ids are assigned in sorted
  // order after the three specials, so the result does not depend on line order.
  static Vocab build(std::span<const std::string> texts);
  static Vocab from_tokens(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(TokenId id) const;
  TokenId id(std::string_view word) const;  // kUnkId when absent
  bool contains(std::string_view word) const;

  std::vector<TokenId> tokenize(std::string_view text) const;
  std::string detokenize(std::span<const TokenId> ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace gradleak
