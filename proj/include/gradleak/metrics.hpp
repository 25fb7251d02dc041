#pragma once

#include <array>
#include <span>
#include <vector>

#include "gradleak/vocab.hpp"

namespace gradleak {

// Percentages in [0, 100].
struct RougeScores {
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;
};

// Overlap counts behind ROUGE-1, ROUGE-2 and ROUGE-L (index 0, 1, 2). Summing
// counts over pairs and scoring the sum gives micro-averaged F-scores.
struct RougeCounts {
  std::array<double, 3> overlap{};
  std::array<double, 3> reference{};
  std::array<double, 3> candidate{};

  RougeCounts& operator+=(const RougeCounts& o);
  RougeScores scores() const;
};

// Clipped n-gram overlap and LCS length. A one-token pair has no bigrams; it
// is counted as a single bigram that matches iff the tokens are equal.
// Throws std::invalid_argument on an empty reference.
RougeCounts rouge_counts(std::span<const TokenId> reference, std::span<const TokenId> candidate);
RougeScores rouge(std::span<const TokenId> reference, std::span<const TokenId> candidate);

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b);
std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b);

// Drops every occurrence of `pad`.
std::vector<TokenId> strip_padding(std::span<const TokenId> ids, TokenId pad = kPadId);

struct BatchRouge {
  RougeScores scores;                  // micro-averaged over the aligned pairs
  RougeCounts counts;
  std::vector<std::size_t> assignment;  // reference b is paired with candidate assignment[b]
};

// Pairs references with candidates by the permutation of minimum total edit
// distance (first in lexicographic order on ties), then micro-averages.
// Exhaustive, so meant for small batches (B <= 8).
BatchRouge batch_rouge(const std::vector<std::vector<TokenId>>& references,
                       const std::vector<std::vector<TokenId>>& candidates);

// Matthews correlation coefficient for binary labels; 0 when any marginal of
// the confusion matrix is zero. Throws on length mismatch or empty input.
double mcc(std::span<const int> predictions, std::span<const int> truths);

}  // namespace gradleak
