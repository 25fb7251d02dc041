#include "gradleak/corpus.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace gradleak {
namespace {

std::runtime_error line_error(const std::string& path, std::size_t line, const std::string& what) {
  return std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

// Splits `total` over buckets in proportion to their sizes (largest remainder,
// ties to the lower bucket).
std::array<std::size_t, 4> apportion(std::size_t total, const std::array<std::size_t, 4>& sizes) {
  const std::size_t n = sizes[0] + sizes[1] + sizes[2] + sizes[3];
  std::array<std::size_t, 4> share{};
  if (total == 0) return share;
  std::array<std::size_t, 4> rem{};
  std::size_t given = 0;
  for (std::size_t q = 0; q < 4; ++q) {
    share[q] = total * sizes[q] / n;
    rem[q] = total * sizes[q] % n;
    given += share[q];
  }
  std::array<std::size_t, 4> order{0, 1, 2, 3};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t k = 0; given < total; k = (k + 1) % 4) {
    if (share[order[k]] < sizes[order[k]]) {
      ++share[order[k]];
      ++given;
    }
  }
  return share;
}

}  // namespace

Corpus load_corpus(const std::string& path, const Vocab* vocab) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus '" + path + "'");
  std::vector<int> labels;
  std::vector<std::string> texts;
  std::vector<std::size_t> line_numbers;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw line_error(path, number, "expected 'label<TAB>text'");
    const std::string label = line.substr(0, tab);
    if (label != "0" && label != "1") throw line_error(path, number, "label must be 0 or 1, got '" + label + "'");
    std::string text = line.substr(tab + 1);
    if (split_words(text).empty()) throw line_error(path, number, "empty text");
    labels.push_back(label == "1" ? 1 : 0);
    texts.push_back(std::move(text));
    line_numbers.push_back(number);
  }
  if (texts.empty()) throw std::runtime_error("corpus '" + path + "' has no sequences");

  Corpus corpus;
  corpus.vocab = vocab ? *vocab : Vocab::build(texts);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    TokenSequence seq{corpus.vocab.tokenize(texts[i]), labels[i]};
    if (std::all_of(seq.ids.begin(), seq.ids.end(), [](TokenId t) { return t == kUnkId; })) {
      corpus.warnings.push_back(path + ":" + std::to_string(line_numbers[i]) + ": sequence consists of unknown words only");
    }
    corpus.sequences.push_back(std::move(seq));
  }
  corpus.texts = std::move(texts);
  return corpus;
}

CorpusSplit stratified_split(const std::vector<TokenSequence>& sequences, std::size_t n_test, std::size_t n_hyper,
                             std::uint64_t seed) {
  const std::size_t n = sequences.size();
  if (n_test + n_hyper > n) throw std::invalid_argument("stratified_split: pools exceed corpus size");
  std::vector<std::size_t> by_length(n);
  std::iota(by_length.begin(), by_length.end(), std::size_t{0});
  std::stable_sort(by_length.begin(), by_length.end(),
                   [&](std::size_t a, std::size_t b) { return sequences[a].ids.size() < sequences[b].ids.size(); });
  // Quartiles by rank; equal lengths stay in the bucket of their first member.
  std::array<std::vector<std::size_t>, 4> buckets;
  std::size_t q = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t target = 4 * r / n;
    if (target > q && (r == 0 || sequences[by_length[r]].ids.size() != sequences[by_length[r - 1]].ids.size())) {
      q = target;
    }
    buckets[q].push_back(by_length[r]);
  }
  std::array<std::size_t, 4> sizes{};
  for (std::size_t k = 0; k < 4; ++k) sizes[k] = buckets[k].size();
  const auto test_share = apportion(n_test, sizes);
  std::array<std::size_t, 4> left{};
  for (std::size_t k = 0; k < 4; ++k) left[k] = sizes[k] - test_share[k];
  const auto hyper_share = apportion(n_hyper, left);

  std::mt19937_64 rng(seed);
  CorpusSplit split;
  for (std::size_t k = 0; k < 4; ++k) {
    auto& b = buckets[k];
    std::shuffle(b.begin(), b.end(), rng);
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (i < test_share[k]) split.test.push_back(b[i]);
      else if (i < test_share[k] + hyper_share[k]) split.hyper.push_back(b[i]);
      else split.train.push_back(b[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.hyper.begin(), split.hyper.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

}  // namespace gradleak
