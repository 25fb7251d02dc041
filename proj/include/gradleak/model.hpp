#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gradleak/autodiff.hpp"
#include "gradleak/tensor_map.hpp"
#include "gradleak/vocab.hpp"

namespace gradleak {

// Architecture of the attacked BERT-style classifier. The default is the
// desk-scale model: 2 post-LN encoder layers, width 16, 2 heads.
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t dim = 16;
  std::size_t heads = 2;
  std::size_t ff_dim = 64;
  std::size_t layers = 2;
  std::size_t max_positions = 32;
  std::size_t num_classes = 2;
  double token_init_std = 0.25;
  double position_init_std = 0.1;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parameter names:
//   embed.token [V,d]  embed.position [P,d]
//   layer{i}.{q,k,v,o}.w [d,d] / .b [1,d]
//   layer{i}.ln1.gain/.bias, layer{i}.ff1.w [d,f] .b, layer{i}.ff2.w [f,d] .b,
//   layer{i}.ln2.gain/.bias
//   pooler.w [d,d] .b, classifier.w [d,C] .b
struct ClassifierModel {
  ModelConfig config;
  TensorMap params;

  static ClassifierModel init(const ModelConfig& config, std::uint64_t seed);
  const Tensor& token_table() const { return params.at("embed.token"); }
};

inline constexpr const char* kTokenTableName = "embed.token";

// Rows e_{t_i}: the representation the attacker optimises. The CLS row and
// positional rows are added inside the model.
Tensor token_embeddings(const ClassifierModel& model, std::span<const TokenId> ids);

// Model input rows e_{t_i} + p_i for positions 1..n.
Tensor embed(const ClassifierModel& model, std::span<const TokenId> ids);

// One post-LN self-attention block. `additive_mask` is a constant broadcast
// onto the attention scores (1xN key mask or NxN causal mask); pass an
// invalid Var for no mask.
ad::Var encoder_layer(const BoundParams& p, const std::string& prefix, ad::Var h, std::size_t heads,
                      ad::Var additive_mask);

// Logits (1xC) for one sequence given its token-embedding rows (n x d).
// `key_mask`, when non-empty, has one entry per token row; false entries are
// padding and are excluded from attention.
ad::Var classifier_logits(const BoundParams& p, const ModelConfig& config, ad::Var token_rows,
                          std::span<const char> key_mask = {});

// Mean softmax cross-entropy over the batch.
ad::Var classifier_batch_loss(const BoundParams& p, const ModelConfig& config,
                              std::span<const ad::Var> token_rows, std::span<const int> labels,
                              std::span<const std::vector<char>> key_masks = {});

// Convenience evaluations on constant parameters.
Tensor classifier_forward(const ClassifierModel& model, const Tensor& token_rows);
double classifier_loss(const ClassifierModel& model, const TokenSequence& seq);
double classifier_loss(const ClassifierModel& model, const Tensor& token_rows, int label);
int classifier_predict(const ClassifierModel& model, const TokenSequence& seq);

// Pooler output (after tanh), 1 x d.
Tensor classifier_pooled(const ClassifierModel& model, const Tensor& token_rows);

// ---------------------------------------------------------------------------
// Auxiliary language models used to score reconstructions.

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual std::size_t vocab_size() const = 0;
  // Row l (0-based) holds log p(. | t_1..t_{l+1}) for l = 0..n-2.
  virtual Tensor next_token_log_probs(std::span<const TokenId> ids) const = 0;
};

// -(1/n) * sum_{l=1}^{n-1} log p(t_{l+1} | t_1..t_l). Note the divisor is n
// while only n-1 conditional terms are summed. Requires n >= 2.
double lm_perplexity(const LanguageModel& lm, std::span<const TokenId> ids);

class UniformLm final : public LanguageModel {
 public:
  explicit UniformLm(std::size_t vocab_size) : vocab_size_(vocab_size) {}
  std::size_t vocab_size() const override { return vocab_size_; }
  Tensor next_token_log_probs(std::span<const TokenId> ids) const override;

 private:
  std::size_t vocab_size_;
};

// First-order Markov model over the shared vocabulary.
class BigramLm final : public LanguageModel {
 public:
  // table(a, b) = p(b | a); rows must sum to 1.
  explicit BigramLm(Tensor table);
  // Add-k smoothed counts from token sequences.
  static BigramLm fit(std::span<const TokenSequence> corpus, std::size_t vocab_size, double smoothing = 0.1);

  std::size_t vocab_size() const override { return table_.rows(); }
  Tensor next_token_log_probs(std::span<const TokenId> ids) const override;
  const Tensor& table() const { return table_; }

 private:
  Tensor table_;
};

struct LmConfig {
  std::size_t vocab_size = 0;
  std::size_t dim = 32;
  std::size_t heads = 2;
  std::size_t ff_dim = 64;
  std::size_t layers = 2;
  std::size_t context = 32;

  void validate() const;
  friend bool operator==(const LmConfig&, const LmConfig&) = default;
};

// Causal transformer LM; same block as the classifier with a causal mask and
// an output projection onto the vocabulary.
class TransformerLm final : public LanguageModel {
 public:
  TransformerLm() = default;
  TransformerLm(LmConfig config, TensorMap params);
  static TransformerLm init(const LmConfig& config, std::uint64_t seed);

  std::size_t vocab_size() const override { return config_.vocab_size; }
  Tensor next_token_log_probs(std::span<const TokenId> ids) const override;

  // Logits (n x V) for every prefix of ids, recorded on the tape of p.
  ad::Var logits(const BoundParams& p, std::span<const TokenId> ids) const;

  const LmConfig& config() const { return config_; }
  const TensorMap& params() const { return params_; }
  TensorMap& params() { return params_; }

 private:
  LmConfig config_;
  TensorMap params_;
};

}  // namespace gradleak
