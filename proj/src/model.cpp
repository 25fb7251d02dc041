#include "gradleak/model.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace gradleak {
namespace {

constexpr double kMaskValue = -1e9;

Tensor gaussian(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(rows, cols);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

void add_encoder_params(TensorMap& params, const std::string& prefix, std::size_t dim, std::size_t ff,
                        std::mt19937_64& rng) {
  const double attn_std = 1.0 / std::sqrt(static_cast<double>(dim));
  for (const char* name : {"q", "k", "v", "o"}) {
    params.set(prefix + name + ".w", gaussian(dim, dim, attn_std, rng));
    params.set(prefix + name + ".b", Tensor(1, dim, 0.0));
  }
  params.set(prefix + "ln1.gain", Tensor(1, dim, 1.0));
  params.set(prefix + "ln1.bias", Tensor(1, dim, 0.0));
  params.set(prefix + "ff1.w", gaussian(dim, ff, attn_std, rng));
  params.set(prefix + "ff1.b", Tensor(1, ff, 0.0));
  params.set(prefix + "ff2.w", gaussian(ff, dim, 1.0 / std::sqrt(static_cast<double>(ff)), rng));
  params.set(prefix + "ff2.b", Tensor(1, dim, 0.0));
  params.set(prefix + "ln2.gain", Tensor(1, dim, 1.0));
  params.set(prefix + "ln2.bias", Tensor(1, dim, 0.0));
}

ad::Var affine_norm(const BoundParams& p, const std::string& prefix, ad::Var h) {
  return ad::add(ad::mul(ad::layer_norm_rows(h), p[prefix + ".gain"]), p[prefix + ".bias"]);
}

ad::Var linear(const BoundParams& p, const std::string& prefix, ad::Var h) {
  return ad::add(ad::matmul(h, p[prefix + ".w"]), p[prefix + ".b"]);
}

void check_ids(std::span<const TokenId> ids, std::size_t vocab_size) {
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
      throw std::invalid_argument("token id " + std::to_string(id) + " outside vocabulary of size " +
                                  std::to_string(vocab_size));
    }
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 4) throw std::invalid_argument("ModelConfig: vocab_size must cover specials plus words");
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw std::invalid_argument("ModelConfig: dim must be a positive multiple of heads");
  }
  if (ff_dim == 0 || max_positions < 2 || num_classes < 2) {
    throw std::invalid_argument("ModelConfig: invalid ff_dim, max_positions or num_classes");
  }
}

ClassifierModel ClassifierModel::init(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  ClassifierModel m;
  m.config = config;
  m.params.set("embed.token", gaussian(config.vocab_size, config.dim, config.token_init_std, rng));
  m.params.set("embed.position", gaussian(config.max_positions, config.dim, config.position_init_std, rng));
  for (std::size_t l = 0; l < config.layers; ++l) {
    add_encoder_params(m.params, "layer" + std::to_string(l) + ".", config.dim, config.ff_dim, rng);
  }
  const double s = 1.0 / std::sqrt(static_cast<double>(config.dim));
  m.params.set("pooler.w", gaussian(config.dim, config.dim, s, rng));
  m.params.set("pooler.b", Tensor(1, config.dim, 0.0));
  m.params.set("classifier.w", gaussian(config.dim, config.num_classes, s, rng));
  m.params.set("classifier.b", Tensor(1, config.num_classes, 0.0));
  return m;
}

Tensor token_embeddings(const ClassifierModel& model, std::span<const TokenId> ids) {
  if (ids.empty()) throw std::invalid_argument("token_embeddings: empty sequence");
  check_ids(ids, model.config.vocab_size);
  const Tensor& table = model.token_table();
  Tensor out(ids.size(), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto src = table.row_span(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row_span(i).begin());
  }
  return out;
}

Tensor embed(const ClassifierModel& model, std::span<const TokenId> ids) {
  if (ids.size() + 1 > model.config.max_positions) {
    throw std::invalid_argument("embed: sequence length " + std::to_string(ids.size()) +
                                " does not fit " + std::to_string(model.config.max_positions) + " positions");
  }
  Tensor out = token_embeddings(model, ids);
  const Tensor& pos = model.params.at("embed.position");
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t c = 0; c < out.cols(); ++c) out(i, c) += pos(i + 1, c);
  return out;
}

ad::Var encoder_layer(const BoundParams& p, const std::string& prefix, ad::Var h, std::size_t heads,
                      ad::Var additive_mask) {
  const std::size_t dim = h.cols();
  const std::size_t head_dim = dim / heads;
  const double score_scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const ad::Var q = linear(p, prefix + "q", h);
  const ad::Var k = linear(p, prefix + "k", h);
  const ad::Var v = linear(p, prefix + "v", h);
  std::vector<ad::Var> head_out;
  head_out.reserve(heads);
  for (std::size_t i = 0; i < heads; ++i) {
    const ad::Var qh = heads == 1 ? q : ad::slice(q, 1, i * head_dim, head_dim);
    const ad::Var kh = heads == 1 ? k : ad::slice(k, 1, i * head_dim, head_dim);
    const ad::Var vh = heads == 1 ? v : ad::slice(v, 1, i * head_dim, head_dim);
    ad::Var scores = ad::scale(ad::matmul(qh, ad::transpose(kh)), score_scale);
    if (additive_mask.valid()) scores = ad::add(scores, additive_mask);
    head_out.push_back(ad::matmul(ad::softmax_rows(scores), vh));
  }
  const ad::Var attn = heads == 1 ? head_out[0] : ad::concat(head_out, 1);
  const ad::Var h1 = affine_norm(p, prefix + "ln1", ad::add(h, linear(p, prefix + "o", attn)));
  const ad::Var ff = linear(p, prefix + "ff2", ad::gelu(linear(p, prefix + "ff1", h1)));
  return affine_norm(p, prefix + "ln2", ad::add(h1, ff));
}

ad::Var classifier_logits(const BoundParams& p, const ModelConfig& config, ad::Var token_rows,
                          std::span<const char> key_mask) {
  const std::size_t n = token_rows.rows();
  if (token_rows.cols() != config.dim) {
    throw std::invalid_argument("classifier_logits: token rows have width " + std::to_string(token_rows.cols()) +
                                ", model width is " + std::to_string(config.dim));
  }
  if (n + 1 > config.max_positions) {
    throw std::invalid_argument("classifier_logits: sequence of length " + std::to_string(n) +
                                " does not fit " + std::to_string(config.max_positions) + " positions");
  }
  if (!key_mask.empty() && key_mask.size() != n) {
    throw std::invalid_argument("classifier_logits: key mask length does not match sequence");
  }
  ad::Tape& tape = p.tape();
  const TokenId cls[] = {kClsId};
  const ad::Var cls_row = ad::embedding_lookup(p["embed.token"], cls);
  const ad::Var rows[] = {cls_row, token_rows};
  ad::Var h = ad::add(ad::concat(rows, 0), ad::slice(p["embed.position"], 0, 0, n + 1));

  ad::Var mask;
  if (!key_mask.empty()) {
    bool any_pad = false;
    Tensor m(1, n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (!key_mask[i]) {
        m(0, i + 1) = kMaskValue;
        any_pad = true;
      }
    }
    if (any_pad) mask = tape.constant(std::move(m));
  }
  for (std::size_t l = 0; l < config.layers; ++l) {
    h = encoder_layer(p, "layer" + std::to_string(l) + ".", h, config.heads, mask);
  }
  const ad::Var pooled = ad::tanh(linear(p, "pooler", ad::slice(h, 0, 0, 1)));
  return linear(p, "classifier", pooled);
}

ad::Var classifier_batch_loss(const BoundParams& p, const ModelConfig& config,
                              std::span<const ad::Var> token_rows, std::span<const int> labels,
                              std::span<const std::vector<char>> key_masks) {
  if (token_rows.empty() || token_rows.size() != labels.size()) {
    throw std::invalid_argument("classifier_batch_loss: need one label per sequence");
  }
  if (!key_masks.empty() && key_masks.size() != token_rows.size()) {
    throw std::invalid_argument("classifier_batch_loss: need one key mask per sequence");
  }
  std::vector<ad::Var> logits;
  logits.reserve(token_rows.size());
  for (std::size_t b = 0; b < token_rows.size(); ++b) {
    logits.push_back(classifier_logits(p, config, token_rows[b],
                                       key_masks.empty() ? std::span<const char>{} : key_masks[b]));
  }
  const ad::Var all = logits.size() == 1 ? logits[0] : ad::concat(logits, 0);
  return ad::cross_entropy_with_logits(all, labels);
}

Tensor classifier_forward(const ClassifierModel& model, const Tensor& token_rows) {
  ad::Tape tape;
  BoundParams p(tape, model.params, false);
  return classifier_logits(p, model.config, tape.constant(token_rows)).value();
}

Tensor classifier_pooled(const ClassifierModel& model, const Tensor& token_rows) {
  ad::Tape tape;
  BoundParams p(tape, model.params, false);
  const ad::Var logits = classifier_logits(p, model.config, tape.constant(token_rows));
  // The pooler tanh is the last tanh node recorded before the classifier.
  for (int id = logits.id(); id >= 0; --id) {
    if (tape.node(id).op == ad::Op::Tanh) return tape.node(id).value;
  }
  throw std::logic_error("classifier_pooled: pooler not found");
}

double classifier_loss(const ClassifierModel& model, const Tensor& token_rows, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= model.config.num_classes) {
    throw std::invalid_argument("classifier_loss: label out of range");
  }
  ad::Tape tape;
  BoundParams p(tape, model.params, false);
  const ad::Var rows[] = {tape.constant(token_rows)};
  const int labels[] = {label};
  return classifier_batch_loss(p, model.config, rows, labels).value().item();
}

double classifier_loss(const ClassifierModel& model, const TokenSequence& seq) {
  return classifier_loss(model, token_embeddings(model, seq.ids), seq.label);
}

int classifier_predict(const ClassifierModel& model, const TokenSequence& seq) {
  const Tensor logits = classifier_forward(model, token_embeddings(model, seq.ids));
  int best = 0;
  for (std::size_t c = 1; c < logits.cols(); ++c)
    if (logits(0, c) > logits(0, static_cast<std::size_t>(best))) best = static_cast<int>(c);
  return best;
}

// ---------------------------------------------------------------------------

double lm_perplexity(const LanguageModel& lm, std::span<const TokenId> ids) {
  if (ids.size() < 2) throw std::invalid_argument("lm_perplexity: need at least two tokens");
  check_ids(ids, lm.vocab_size());
  const Tensor logp = lm.next_token_log_probs(ids);
  double total = 0.0;
  for (std::size_t l = 0; l + 1 < ids.size(); ++l) total += logp(l, static_cast<std::size_t>(ids[l + 1]));
  return -total / static_cast<double>(ids.size());
}

Tensor UniformLm::next_token_log_probs(std::span<const TokenId> ids) const {
  return Tensor(ids.size() - 1, vocab_size_, -std::log(static_cast<double>(vocab_size_)));
}

BigramLm::BigramLm(Tensor table) : table_(std::move(table)) {
  if (table_.rows() != table_.cols()) throw std::invalid_argument("BigramLm: table must be square");
  for (std::size_t r = 0; r < table_.rows(); ++r) {
    double s = 0.0;
    for (double v : table_.row_span(r)) {
      if (v < 0.0) throw std::invalid_argument("BigramLm: negative probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("BigramLm: row " + std::to_string(r) + " does not sum to 1");
  }
}

BigramLm BigramLm::fit(std::span<const TokenSequence> corpus, std::size_t vocab_size, double smoothing) {
  Tensor counts(vocab_size, vocab_size, smoothing);
  for (const auto& seq : corpus)
    for (std::size_t i = 0; i + 1 < seq.ids.size(); ++i)
      counts(static_cast<std::size_t>(seq.ids[i]), static_cast<std::size_t>(seq.ids[i + 1])) += 1.0;
  for (std::size_t r = 0; r < vocab_size; ++r) {
    double s = 0.0;
    for (double v : counts.row_span(r)) s += v;
    for (double& v : counts.row_span(r)) v /= s;
  }
  return BigramLm(std::move(counts));
}

Tensor BigramLm::next_token_log_probs(std::span<const TokenId> ids) const {
  Tensor out(ids.size() - 1, table_.cols());
  for (std::size_t l = 0; l + 1 < ids.size(); ++l) {
    auto src = table_.row_span(static_cast<std::size_t>(ids[l]));
    for (std::size_t c = 0; c < src.size(); ++c) out(l, c) = std::log(src[c]);
  }
  return out;
}

void LmConfig::validate() const {
  if (vocab_size < 4) throw std::invalid_argument("LmConfig: vocab_size too small");
  if (dim == 0 || heads == 0 || dim % heads != 0) {
    throw std::invalid_argument("LmConfig: dim must be a positive multiple of heads");
  }
  if (ff_dim == 0 || context < 2) throw std::invalid_argument("LmConfig: invalid ff_dim or context");
}

TransformerLm::TransformerLm(LmConfig config, TensorMap params) : config_(config), params_(std::move(params)) {
  config_.validate();
  if (!params_.contains("embed.token") || params_.at("embed.token").rows() != config_.vocab_size) {
    throw std::invalid_argument("TransformerLm: parameters do not match config");
  }
}

TransformerLm TransformerLm::init(const LmConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  TensorMap params;
  params.set("embed.token", gaussian(config.vocab_size, config.dim, 0.5, rng));
  params.set("embed.position", gaussian(config.context, config.dim, 0.5, rng));
  for (std::size_t l = 0; l < config.layers; ++l) {
    add_encoder_params(params, "layer" + std::to_string(l) + ".", config.dim, config.ff_dim, rng);
  }
  params.set("head.w", gaussian(config.dim, config.vocab_size, 1.0 / std::sqrt(static_cast<double>(config.dim)), rng));
  params.set("head.b", Tensor(1, config.vocab_size, 0.0));
  return TransformerLm(config, std::move(params));
}

ad::Var TransformerLm::logits(const BoundParams& p, std::span<const TokenId> ids) const {
  const std::size_t n = ids.size();
  if (n == 0 || n > config_.context) {
    throw std::invalid_argument("TransformerLm: sequence length " + std::to_string(n) + " outside context");
  }
  check_ids(ids, config_.vocab_size);
  ad::Tape& tape = p.tape();
  ad::Var h = ad::add(ad::embedding_lookup(p["embed.token"], ids), ad::slice(p["embed.position"], 0, 0, n));
  ad::Var mask;
  if (n > 1) {
    Tensor m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m(i, j) = kMaskValue;
    mask = tape.constant(std::move(m));
  }
  for (std::size_t l = 0; l < config_.layers; ++l) {
    h = encoder_layer(p, "layer" + std::to_string(l) + ".", h, config_.heads, mask);
  }
  return linear(p, "head", h);
}

Tensor TransformerLm::next_token_log_probs(std::span<const TokenId> ids) const {
  ad::Tape tape;
  BoundParams p(tape, params_, false);
  Tensor z = logits(p, ids.first(ids.size() - 1)).value();
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row_span(r);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (double& v : row) v -= lse;
  }
  return z;
}

}  // namespace gradleak
