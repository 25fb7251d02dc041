#include "gradleak/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace gradleak {
namespace {

using Ngram = std::vector<TokenId>;

std::map<Ngram, std::size_t> ngram_counts(std::span<const TokenId> ids, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= ids.size(); ++i) ++counts[Ngram(ids.begin() + i, ids.begin() + i + n)];
  return counts;
}

double clipped_overlap(const std::map<Ngram, std::size_t>& a, const std::map<Ngram, std::size_t>& b) {
  double total = 0.0;
  for (const auto& [g, count] : a) {
    auto it = b.find(g);
    if (it != b.end()) total += static_cast<double>(std::min(count, it->second));
  }
  return total;
}

double f1_percent(double overlap, double ref, double cand) {
  if (overlap == 0.0 || ref == 0.0 || cand == 0.0) return 0.0;
  const double p = overlap / cand;
  const double r = overlap / ref;
  return 100.0 * 2.0 * p * r / (p + r);
}

}  // namespace

RougeCounts& RougeCounts::operator+=(const RougeCounts& o) {
  for (std::size_t k = 0; k < 3; ++k) {
    overlap[k] += o.overlap[k];
    reference[k] += o.reference[k];
    candidate[k] += o.candidate[k];
  }
  return *this;
}

RougeScores RougeCounts::scores() const {
  return {f1_percent(overlap[0], reference[0], candidate[0]), f1_percent(overlap[1], reference[1], candidate[1]),
          f1_percent(overlap[2], reference[2], candidate[2])};
}

RougeCounts rouge_counts(std::span<const TokenId> reference, std::span<const TokenId> candidate) {
  if (reference.empty()) throw std::invalid_argument("rouge: empty reference");
  RougeCounts c;
  c.overlap[0] = clipped_overlap(ngram_counts(reference, 1), ngram_counts(candidate, 1));
  c.reference[0] = static_cast<double>(reference.size());
  c.candidate[0] = static_cast<double>(candidate.size());
  if (reference.size() == 1 && candidate.size() == 1) {
    c.overlap[1] = reference[0] == candidate[0] ? 1.0 : 0.0;
    c.reference[1] = c.candidate[1] = 1.0;
  } else {
    c.overlap[1] = clipped_overlap(ngram_counts(reference, 2), ngram_counts(candidate, 2));
    c.reference[1] = static_cast<double>(reference.size() - 1);
    c.candidate[1] = candidate.empty() ? 0.0 : static_cast<double>(candidate.size() - 1);
  }
  c.overlap[2] = static_cast<double>(lcs_length(reference, candidate));
  c.reference[2] = c.reference[0];
  c.candidate[2] = c.candidate[0];
  return c;
}

RougeScores rouge(std::span<const TokenId> reference, std::span<const TokenId> candidate) {
  return rouge_counts(reference, candidate).scores();
}

std::size_t lcs_length(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t edit_distance(std::span<const TokenId> a, std::span<const TokenId> b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<TokenId> strip_padding(std::span<const TokenId> ids, TokenId pad) {
  std::vector<TokenId> out;
  for (TokenId t : ids)
    if (t != pad) out.push_back(t);
  return out;
}

BatchRouge batch_rouge(const std::vector<std::vector<TokenId>>& references,
                       const std::vector<std::vector<TokenId>>& candidates) {
  if (references.empty() || references.size() != candidates.size()) {
    throw std::invalid_argument("batch_rouge: need equally many references and candidates");
  }
  if (references.size() > 8) throw std::invalid_argument("batch_rouge: batch too large for exhaustive pairing");
  const std::size_t b = references.size();
  std::vector<std::vector<std::size_t>> cost(b, std::vector<std::size_t>(b));
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) cost[i][j] = edit_distance(references[i], candidates[j]);

  std::vector<std::size_t> perm(b);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  std::size_t best_cost = std::numeric_limits<std::size_t>::max();
  do {
    std::size_t total = 0;
    for (std::size_t i = 0; i < b; ++i) total += cost[i][perm[i]];
    if (total < best_cost) {
      best_cost = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  BatchRouge out;
  out.assignment = best;
  for (std::size_t i = 0; i < b; ++i) out.counts += rouge_counts(references[i], candidates[best[i]]);
  out.scores = out.counts.scores();
  return out;
}

double mcc(std::span<const int> predictions, std::span<const int> truths) {
  if (predictions.size() != truths.size()) throw std::invalid_argument("mcc: length mismatch");
  if (predictions.empty()) throw std::invalid_argument("mcc: no labels");
  double tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const bool p = predictions[i] != 0, t = truths[i] != 0;
    if (p && t) ++tp;
    else if (!p && !t) ++tn;
    else if (p) ++fp;
    else ++fn;
  }
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

}  // namespace gradleak
