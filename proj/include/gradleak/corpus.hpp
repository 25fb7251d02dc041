#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradleak/vocab.hpp"

namespace gradleak {

struct Corpus {
  Vocab vocab;
  std::vector<TokenSequence> sequences;
  std::vector<std::string> texts;     // raw text per sequence
  std::vector<std::string> warnings;  // e.g. lines that tokenize to UNK only
};

// Reads a UTF-8 TSV of `label<TAB>text` lines. Blank lines are skipped.
// Throws std::runtime_error naming the line on malformed input or a label
// outside {0,1}. The vocabulary is built from this file unless `vocab` is
// given, in which case unknown words map to [UNK].
Corpus load_corpus(const std::string& path, const Vocab* vocab = nullptr);

struct CorpusSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> hyper;
  std::vector<std::size_t> test;
};

// Length-stratified split: sequences are bucketed by length quartile and each
// pool takes its share from every bucket. Indices in each pool are sorted.
CorpusSplit stratified_split(const std::vector<TokenSequence>& sequences, std::size_t n_test, std::size_t n_hyper,
                             std::uint64_t seed);

}  // namespace gradleak
