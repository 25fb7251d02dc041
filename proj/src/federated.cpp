#include "gradleak/federated.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace gradleak {
namespace {

ad::Var padded_batch_loss(const BoundParams& p, const ClassifierModel& model, const Batch& batch) {
  std::vector<ad::Var> rows;
  rows.reserve(batch.size());
  const ad::Var table = p[kTokenTableName];
  for (const auto& ids : batch.padded_ids) rows.push_back(ad::embedding_lookup(table, ids));
  const std::vector<int> labels = batch.labels();
  return classifier_batch_loss(p, model.config, rows, labels, batch.masks);
}

}  // namespace

Batch Batch::make(std::vector<TokenSequence> sequences, std::size_t padded_length) {
  if (sequences.empty()) throw std::invalid_argument("Batch: no sequences");
  std::size_t longest = 0;
  for (const auto& s : sequences) {
    if (s.ids.empty()) throw std::invalid_argument("Batch: empty sequence");
    longest = std::max(longest, s.ids.size());
  }
  if (padded_length == 0) padded_length = longest;
  if (padded_length < longest) throw std::invalid_argument("Batch: padded length shorter than a sequence");
  Batch b;
  b.padded_length = padded_length;
  for (const auto& s : sequences) {
    std::vector<TokenId> ids = s.ids;
    std::vector<char> mask(s.ids.size(), 1);
    ids.resize(padded_length, kPadId);
    mask.resize(padded_length, 0);
    b.padded_ids.push_back(std::move(ids));
    b.masks.push_back(std::move(mask));
  }
  b.sequences = std::move(sequences);
  return b;
}

std::vector<int> Batch::labels() const {
  std::vector<int> out;
  for (const auto& s : sequences) out.push_back(s.label);
  return out;
}

std::vector<std::size_t> Batch::lengths() const {
  std::vector<std::size_t> out;
  for (const auto& s : sequences) out.push_back(s.ids.size());
  return out;
}

GradientSet client_gradient(const ClassifierModel& model, const Batch& batch) {
  ad::Tape tape;
  BoundParams p(tape, model.params, true);
  const ad::Var loss = padded_batch_loss(p, model, batch);
  const auto grads = tape.backward(loss, p.vars());
  GradientSet out;
  for (std::size_t i = 0; i < grads.size(); ++i) out.set(p.names()[i], grads[i].value());
  return out;
}

double batch_loss(const ClassifierModel& model, const Batch& batch) {
  ad::Tape tape;
  BoundParams p(tape, model.params, false);
  return padded_batch_loss(p, model, batch).value().item();
}

TensorMap fedsgd_aggregate(const TensorMap& params, std::span<const GradientSet> client_gradients, double rate) {
  if (client_gradients.empty()) throw std::invalid_argument("fedsgd_aggregate: no client gradients");
  for (const auto& g : client_gradients) {
    if (!g.same_layout(params)) throw std::invalid_argument("fedsgd_aggregate: gradient layout does not match model");
  }
  const double step = rate / static_cast<double>(client_gradients.size());
  TensorMap out = params;
  for (auto& [name, t] : out) {
    for (const auto& g : client_gradients) {
      const Tensor& gt = g.at(name);
      for (std::size_t i = 0; i < t.size(); ++i) t[i] -= step * gt[i];
    }
  }
  return out;
}

GradientSet apply_defense(const GradientSet& gradients, const DefenseConfig& config) {
  if (config.sigma < 0.0) throw std::invalid_argument("apply_defense: sigma must be non-negative");
  if (config.sigma == 0.0) return gradients;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, config.sigma);
  GradientSet out = gradients;
  for (auto& [name, t] : out)
    for (double& v : t.data()) v += noise(rng);
  return out;
}

}  // namespace gradleak
