#include "gradleak/train.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gradleak/adam.hpp"

namespace gradleak {
namespace {

std::vector<AdamState> make_states(const TensorMap& params, double rate) {
  std::vector<AdamState> states;
  states.reserve(params.size());
  for (const auto& [name, t] : params) states.emplace_back(t.rows(), t.cols(), rate, 1.0);
  return states;
}

void apply_update(TensorMap& params, std::vector<AdamState>& states, const std::vector<ad::Var>& grads,
                  double sigma, std::mt19937_64& noise_rng) {
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::size_t i = 0;
  for (auto& [name, t] : params) {
    Tensor g = grads[i].value();
    if (sigma > 0.0)
      for (double& v : g.data()) v += noise(noise_rng);
    t = adam_step(states[i], t, g);
    ++i;
  }
}

// Runs the shared epoch/minibatch loop; `batch_loss` records the loss of a
// minibatch on the given bound parameters.
template <class LossFn, class CorpusLoss>
TrainReport train_loop(TensorMap& params, std::span<const TokenSequence> corpus, const TrainConfig& config,
                       LossFn batch_loss, CorpusLoss corpus_loss) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  if (config.batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (config.gradient_noise_sigma < 0.0) throw std::invalid_argument("train: noise sigma must be >= 0");
  TrainReport report;
  report.initial_loss = corpus_loss();
  std::vector<AdamState> states = make_states(params, config.learning_rate);
  std::mt19937_64 rng(config.seed);
  std::mt19937_64 noise_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const TokenSequence*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&corpus[order[i]]);
      ad::Tape tape;
      BoundParams bound(tape, params, true);
      const ad::Var loss = batch_loss(bound, batch);
      report.batch_losses.push_back(loss.value().item());
      const auto grads = tape.backward(loss, bound.vars());
      apply_update(params, states, grads, config.gradient_noise_sigma, noise_rng);
    }
    report.epoch_losses.push_back(corpus_loss());
  }
  return report;
}

}  // namespace

double classifier_corpus_loss(const ClassifierModel& model, std::span<const TokenSequence> corpus) {
  double total = 0.0;
  for (const auto& seq : corpus) total += classifier_loss(model, seq);
  return corpus.empty() ? 0.0 : total / static_cast<double>(corpus.size());
}

double classifier_accuracy(const ClassifierModel& model, std::span<const TokenSequence> corpus) {
  if (corpus.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& seq : corpus) hits += classifier_predict(model, seq) == seq.label ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(corpus.size());
}

double lm_corpus_loss(const TransformerLm& lm, std::span<const TokenSequence> corpus) {
  double total = 0.0;
  std::size_t terms = 0;
  for (const auto& seq : corpus) {
    if (seq.ids.size() < 2) continue;
    const Tensor logp = lm.next_token_log_probs(seq.ids);
    for (std::size_t l = 0; l + 1 < seq.ids.size(); ++l) total -= logp(l, static_cast<std::size_t>(seq.ids[l + 1]));
    terms += seq.ids.size() - 1;
  }
  return terms ? total / static_cast<double>(terms) : 0.0;
}

TrainReport train_classifier(ClassifierModel& model, std::span<const TokenSequence> corpus,
                             const TrainConfig& config) {
  auto batch_loss = [&](const BoundParams& p, const std::vector<const TokenSequence*>& batch) {
    std::vector<ad::Var> rows;
    std::vector<int> labels;
    const ad::Var table = p["embed.token"];
    for (const auto* seq : batch) {
      rows.push_back(ad::embedding_lookup(table, seq->ids));
      labels.push_back(seq->label);
    }
    return classifier_batch_loss(p, model.config, rows, labels);
  };
  return train_loop(model.params, corpus, config, batch_loss,
                    [&] { return classifier_corpus_loss(model, corpus); });
}

TrainReport train_lm(TransformerLm& lm, std::span<const TokenSequence> corpus, const TrainConfig& config) {
  auto batch_loss = [&](const BoundParams& p, const std::vector<const TokenSequence*>& batch) {
    std::vector<ad::Var> logits;
    std::vector<int> targets;
    for (const auto* seq : batch) {
      if (seq->ids.size() < 2) continue;
      std::span<const TokenId> ids(seq->ids);
      logits.push_back(lm.logits(p, ids.first(ids.size() - 1)));
      targets.insert(targets.end(), ids.begin() + 1, ids.end());
    }
    if (logits.empty()) throw std::invalid_argument("train_lm: batch without any two-token sequence");
    const ad::Var all = logits.size() == 1 ? logits[0] : ad::concat(logits, 0);
    return ad::cross_entropy_with_logits(all, targets);
  };
  return train_loop(lm.params(), corpus, config, batch_loss, [&] { return lm_corpus_loss(lm, corpus); });
}

}  // namespace gradleak
