#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gradleak/model.hpp"

namespace gradleak {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  double learning_rate = 3e-3;
  std::uint64_t seed = 0;
  // Gaussian noise added to every minibatch gradient (defended fine-tuning).
  double gradient_noise_sigma = 0.0;
};

struct TrainReport {
  double initial_loss = 0.0;           // mean loss over the corpus before training
  std::vector<double> epoch_losses;    // mean loss over the corpus after each epoch
  std::vector<double> batch_losses;    // every minibatch loss, in order
};

// Minibatch Adam on mean softmax cross-entropy. Throws on an empty corpus.
TrainReport train_classifier(ClassifierModel& model, std::span<const TokenSequence> corpus,
                             const TrainConfig& config);

// Next-token cross-entropy over every sequence position.
TrainReport train_lm(TransformerLm& lm, std::span<const TokenSequence> corpus, const TrainConfig& config);

double classifier_corpus_loss(const ClassifierModel& model, std::span<const TokenSequence> corpus);
double lm_corpus_loss(const TransformerLm& lm, std::span<const TokenSequence> corpus);
double classifier_accuracy(const ClassifierModel& model, std::span<const TokenSequence> corpus);

}  // namespace gradleak
