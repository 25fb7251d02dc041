#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gradleak/model.hpp"
#include "gradleak/tensor_map.hpp"

namespace gradleak {

// Per-layer gradients a client sends to the server. Same names, order and
// shapes as the model parameters.
using GradientSet = TensorMap;

// A client minibatch padded with [PAD] to a common length.
struct Batch {
  std::vector<TokenSequence> sequences;
  std::size_t padded_length = 0;
  std::vector<std::vector<TokenId>> padded_ids;
  std::vector<std::vector<char>> masks;  // 1 for real tokens

  // padded_length of 0 means the longest sequence.
  static Batch make(std::vector<TokenSequence> sequences, std::size_t padded_length = 0);

  std::size_t size() const { return sequences.size(); }
  std::vector<int> labels() const;
  std::vector<std::size_t> lengths() const;
};

// Exact gradient of the mean batch loss with respect to every parameter.
GradientSet client_gradient(const ClassifierModel& model, const Batch& batch);

// Mean classifier loss of a padded batch; padding is masked out of attention.
double batch_loss(const ClassifierModel& model, const Batch& batch);

// theta - rate * mean(client gradients).
TensorMap fedsgd_aggregate(const TensorMap& params, std::span<const GradientSet> client_gradients, double rate);

struct DefenseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

// Adds i.i.d. N(0, sigma^2) noise to every entry, deterministically in seed.
GradientSet apply_defense(const GradientSet& gradients, const DefenseConfig& config);

}  // namespace gradleak
