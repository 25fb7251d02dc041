#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gradleak/federated.hpp"
#include "gradleak/gradient_losses.hpp"
#include "gradleak/model.hpp"
#include "gradleak/transforms.hpp"

namespace gradleak {

// Dummy input of the attack: one n_b x d block of token-embedding rows per
// batch element.
using EmbeddingSeq = std::vector<Tensor>;

enum class LabelMode { Known, Enumerate };

struct AttackConfig {
  GradientLoss loss = GradientLoss::Cos;
  double alpha_tag = 0.01;
  double alpha_lm = 0.2;
  double alpha_reg = 1.0;
  double learning_rate = 0.01;
  double decay = 0.89;
  std::size_t decay_interval = 50;
  std::size_t n_init = 500;
  std::size_t n_perm = 500;
  std::size_t iterations = 40;          // outer iterations
  std::size_t continuous_steps = 50;    // Adam steps per outer iteration
  std::size_t discrete_steps = 200;     // proposals per outer iteration
  std::uint64_t seed = 0;
  LabelMode label_mode = LabelMode::Known;
  std::size_t snapshot_interval = 500;  // continuous steps between extra snapshots
  double time_budget_seconds = 0.0;     // 0 disables the budget
  // Inclusive length range swept when set; every batch element gets the same
  // length and the lowest final reconstruction loss wins.
  std::optional<std::pair<std::size_t, std::size_t>> length_sweep;

  void validate() const;
};

// Named hyperparameter presets: lamp-cos, lamp-l1l2, lamp-l2, tag, dlg and the
// ablations lamp-cos-nolm, lamp-cos-noreg, lamp-cos-nodiscrete.
AttackConfig attack_preset(std::string_view name);
std::vector<std::string> attack_preset_names();

// What the attacker knows besides the gradient: sequence lengths and (in
// known-label mode) the labels.
struct AttackTarget {
  std::vector<std::size_t> lengths;
  std::vector<int> labels;
};

struct Snapshot {
  std::string phase;  // "init", "continuous" or "outer"
  std::size_t outer_iteration = 0;
  std::size_t continuous_step = 0;
  double l_rec = 0.0;
  double l_lm = 0.0;
  std::vector<std::vector<TokenId>> tokens;
};

struct ReconstructionResult {
  std::vector<std::vector<TokenId>> tokens;
  std::vector<int> labels;
  EmbeddingSeq embeddings;
  std::vector<Snapshot> snapshots;
  double final_l_rec = 0.0;
  double final_l_lm = 0.0;
  std::size_t accepted_proposals = 0;
  double wall_seconds = 0.0;
  bool truncated = false;
};

// Nearest vocabulary row by cosine similarity; ties go to the lowest id.
class VocabularyProjector {
 public:
  explicit VocabularyProjector(const Tensor& token_table, std::vector<TokenId> excluded = {});
  std::vector<TokenId> project(const Tensor& rows) const;
  std::vector<std::vector<TokenId>> project(const EmbeddingSeq& x) const;

 private:
  Tensor unit_rows_;
  std::vector<char> excluded_;
};

std::vector<TokenId> project_to_vocabulary(const Tensor& rows, const Tensor& token_table);

struct ObjectiveValue {
  double total = 0.0;      // L_grad + alpha_reg * L_reg
  double grad_term = 0.0;  // L_grad
  double reg_term = 0.0;   // L_reg
};

// L_rec for a fixed victim, observed gradient and label assignment. The
// token-embedding table is left out of the matched layers: its gradient is
// nonzero exactly on the rows of the client's tokens, and the dummy input
// does not pass through the table. Layers whose observed gradient is
// numerically zero (see kZeroNormTolerance) carry nothing to match and are
// dropped as well.
class ReconstructionObjective {
 public:
  ReconstructionObjective(const ClassifierModel& victim, const GradientSet& observed, std::vector<int> labels,
                          GradientLoss loss, double alpha_tag, double alpha_reg);

  ObjectiveValue evaluate(const EmbeddingSeq& x) const;
  // Also fills grad_x with d L_rec / d x, via a second differentiation.
  ObjectiveValue evaluate_with_gradient(const EmbeddingSeq& x, EmbeddingSeq& grad_x) const;
  // Parameter gradients the dummy input induces (matched layers only).
  GradientSet induced_gradient(const EmbeddingSeq& x) const;

  const std::vector<std::string>& matched_layers() const { return matched_; }
  const std::vector<int>& labels() const { return labels_; }
  double mean_vocab_norm() const { return mean_vocab_norm_; }

 private:
  ObjectiveValue run(const EmbeddingSeq& x, EmbeddingSeq* grad_x) const;

  const ClassifierModel* victim_;
  std::vector<std::string> matched_;
  std::vector<Tensor> observed_;
  std::vector<int> labels_;
  GradientLoss loss_;
  double alpha_tag_;
  double alpha_reg_;
  double mean_vocab_norm_;
};

// Mean perplexity over elements with at least two tokens; 0 when none.
double batch_perplexity(const LanguageModel& lm, const std::vector<std::vector<TokenId>>& tokens);

// Two-step initialisation: best of n_init Gaussian draws (entry std
// mean_vocab_norm / sqrt(d)), then best of n_perm random position
// permutations of that draw, both by L_grad.
EmbeddingSeq init_embeddings(const AttackConfig& config, const ReconstructionObjective& objective,
                             std::span<const std::size_t> lengths, std::size_t dim, std::mt19937_64& rng);

// Strict-improvement acceptance rule on the combined objective.
bool accept_candidate(double rec_current, double lm_current, double rec_candidate, double lm_candidate,
                      double alpha_lm);

// Returns x' when L_rec(x') + alpha_lm L_lm(t') < L_rec(x) + alpha_lm L_lm(t),
// otherwise x. Perplexity is scored on the projected tokens.
const EmbeddingSeq& select_candidate(const EmbeddingSeq& x, const EmbeddingSeq& candidate,
                                     const ReconstructionObjective& objective,
                                     const VocabularyProjector& projector, const LanguageModel* lm,
                                     double alpha_lm);

// The full alternating attack. `lm` may be null when alpha_lm is 0.
ReconstructionResult run_attack(const ClassifierModel& victim, const GradientSet& observed,
                                const LanguageModel* lm, const AttackTarget& target, const AttackConfig& config);

}  // namespace gradleak
