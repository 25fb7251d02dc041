#include "gradleak/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace gradleak {
namespace {

const std::vector<std::string> kSpecials = {"[CLS]", "[PAD]", "[UNK]"};

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '\'' || c >= 0x80; }

}  // namespace

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) words.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      words.emplace_back(1, ch);
    }
  }
  flush();
  return words;
}

Vocab Vocab::build(std::span<const std::string> texts) {
  std::set<std::string> words;
  for (const auto& t : texts)
    for (auto& w : split_words(t)) words.insert(std::move(w));
  std::vector<std::string> tokens = kSpecials;
  for (const auto& w : words)
    if (std::find(kSpecials.begin(), kSpecials.end(), w) == kSpecials.end()) tokens.push_back(w);
  return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kSpecials.size() ||
      !std::equal(kSpecials.begin(), kSpecials.end(), tokens.begin())) {
    throw std::invalid_argument("Vocab: token list must start with [CLS] [PAD] [UNK]");
  }
  Vocab v;
  v.tokens_ = std::move(tokens);
  for (std::size_t i = 0; i < v.tokens_.size(); ++i) {
    if (!v.index_.emplace(v.tokens_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("Vocab: duplicate token '" + v.tokens_[i] + "'");
    }
  }
  return v;
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw std::out_of_range("Vocab: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

TokenId Vocab::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocab::contains(std::string_view word) const { return index_.contains(std::string(word)); }

std::vector<TokenId> Vocab::tokenize(std::string_view text) const {
  std::vector<TokenId> ids;
  for (const auto& w : split_words(text)) ids.push_back(id(w));
  return ids;
}

std::string Vocab::detokenize(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (!out.empty()) out.push_back(' ');
    out += token(id);
  }
  return out;
}

}  // namespace gradleak
