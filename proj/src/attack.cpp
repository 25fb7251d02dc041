#include "gradleak/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gradleak/adam.hpp"

namespace gradleak {
namespace {

using Clock = std::chrono::steady_clock;

class PerplexityCache {
 public:
  explicit PerplexityCache(const LanguageModel* lm) : lm_(lm) {}

  double batch(const std::vector<std::vector<TokenId>>& tokens) {
    if (!lm_) return 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& t : tokens) {
      if (t.size() < 2) continue;
      auto [it, inserted] = cache_.try_emplace(t, 0.0);
      if (inserted) it->second = lm_perplexity(*lm_, t);
      total += it->second;
      ++count;
    }
    return count ? total / static_cast<double>(count) : 0.0;
  }

 private:
  const LanguageModel* lm_;
  std::map<std::vector<TokenId>, double> cache_;
};

struct Deadline {
  Clock::time_point start = Clock::now();
  double budget = 0.0;
  bool expired() const {
    return budget > 0.0 && std::chrono::duration<double>(Clock::now() - start).count() > budget;
  }
};

ReconstructionResult run_single(const ClassifierModel& victim, const GradientSet& observed, const LanguageModel* lm,
                                std::span<const std::size_t> lengths, std::vector<int> labels,
                                const AttackConfig& cfg, const Deadline& deadline) {
  const ReconstructionObjective objective(victim, observed, labels, cfg.loss, cfg.alpha_tag, cfg.alpha_reg);
  const VocabularyProjector projector(victim.token_table(), {kClsId, kPadId});
  PerplexityCache perplexity(lm);
  const bool use_lm = lm != nullptr && cfg.alpha_lm != 0.0;
  std::mt19937_64 rng(cfg.seed);

  ReconstructionResult result;
  result.labels = labels;
  EmbeddingSeq x = init_embeddings(cfg, objective, lengths, victim.config.dim, rng);

  std::vector<AdamState> adam;
  for (const auto& xb : x) adam.emplace_back(xb.rows(), xb.cols(), cfg.learning_rate, cfg.decay, cfg.decay_interval);

  std::vector<std::size_t> movable;
  for (std::size_t b = 0; b < x.size(); ++b)
    if (x[b].rows() >= 2) movable.push_back(b);

  auto snapshot = [&](const char* phase, std::size_t outer, std::size_t step) {
    Snapshot s;
    s.phase = phase;
    s.outer_iteration = outer;
    s.continuous_step = step;
    s.tokens = projector.project(x);
    s.l_rec = objective.evaluate(x).total;
    s.l_lm = perplexity.batch(s.tokens);
    result.snapshots.push_back(std::move(s));
  };

  snapshot("init", 0, 0);
  std::size_t step = 0;
  EmbeddingSeq grad;
  for (std::size_t outer = 1; outer <= cfg.iterations && !result.truncated; ++outer) {
    for (std::size_t j = 0; j < cfg.continuous_steps; ++j) {
      if (deadline.expired()) {
        result.truncated = true;
        break;
      }
      objective.evaluate_with_gradient(x, grad);
      for (std::size_t b = 0; b < x.size(); ++b) x[b] = adam_step(adam[b], x[b], grad[b]);
      ++step;
      if (cfg.snapshot_interval != 0 && step % cfg.snapshot_interval == 0) snapshot("continuous", outer, step);
    }

    if (cfg.discrete_steps > 0 && !movable.empty() && !result.truncated) {
      std::vector<std::vector<TokenId>> tokens = projector.project(x);
      double rec = objective.evaluate(x).total;
      double lm_value = use_lm ? perplexity.batch(tokens) : 0.0;
      std::uniform_int_distribution<std::size_t> pick_element(0, movable.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_kind(0, kAllTransforms.size() - 1);
      for (std::size_t j = 0; j < cfg.discrete_steps; ++j) {
        if (deadline.expired()) {
          result.truncated = true;
          break;
        }
        const std::size_t b = movable[pick_element(rng)];
        const Transform kind = kAllTransforms[pick_kind(rng)];
        const Permutation perm = random_transform(kind, x[b].rows(), rng);
        if (is_identity(perm)) continue;
        EmbeddingSeq candidate = x;
        candidate[b] = permute_rows(x[b], perm);
        // Projection is row-wise, so the candidate's tokens are the permuted tokens.
        std::vector<std::vector<TokenId>> cand_tokens = tokens;
        cand_tokens[b] = permute<TokenId>(tokens[b], perm);
        const double cand_rec = objective.evaluate(candidate).total;
        const double cand_lm = use_lm ? perplexity.batch(cand_tokens) : 0.0;
        if (accept_candidate(rec, lm_value, cand_rec, cand_lm, cfg.alpha_lm)) {
          x = std::move(candidate);
          tokens = std::move(cand_tokens);
          rec = cand_rec;
          lm_value = cand_lm;
          ++result.accepted_proposals;
        }
      }
    }
    snapshot("outer", outer, step);
  }

  result.tokens = projector.project(x);
  result.final_l_rec = objective.evaluate(x).total;
  result.final_l_lm = perplexity.batch(result.tokens);
  result.embeddings = std::move(x);
  return result;
}

ReconstructionResult run_for_lengths(const ClassifierModel& victim, const GradientSet& observed,
                                     const LanguageModel* lm, std::span<const std::size_t> lengths,
                                     const std::vector<int>& known_labels, const AttackConfig& cfg,
                                     const Deadline& deadline) {
  if (cfg.label_mode == LabelMode::Known) {
    if (known_labels.size() != lengths.size()) {
      throw std::invalid_argument("run_attack: known-label mode needs one label per sequence");
    }
    return run_single(victim, observed, lm, lengths, known_labels, cfg, deadline);
  }
  const std::size_t classes = victim.config.num_classes;
  std::size_t assignments = 1;
  for (std::size_t b = 0; b < lengths.size(); ++b) {
    assignments *= classes;
    if (assignments > 4096) throw std::invalid_argument("run_attack: too many label assignments to enumerate");
  }
  std::optional<ReconstructionResult> best;
  for (std::size_t a = 0; a < assignments; ++a) {
    std::vector<int> labels(lengths.size());
    std::size_t code = a;
    for (auto& l : labels) {
      l = static_cast<int>(code % classes);
      code /= classes;
    }
    ReconstructionResult r = run_single(victim, observed, lm, lengths, labels, cfg, deadline);
    if (!best || r.final_l_rec < best->final_l_rec) best = std::move(r);
    if (best->truncated) break;
  }
  return std::move(*best);
}

}  // namespace

void AttackConfig::validate() const {
  if (alpha_tag < 0 || alpha_lm < 0 || alpha_reg < 0) throw std::invalid_argument("AttackConfig: weights must be >= 0");
  if (learning_rate <= 0) throw std::invalid_argument("AttackConfig: learning rate must be positive");
  if (decay <= 0 || decay > 1) throw std::invalid_argument("AttackConfig: decay must lie in (0, 1]");
  if (decay_interval == 0) throw std::invalid_argument("AttackConfig: decay interval must be positive");
  if (n_init == 0) throw std::invalid_argument("AttackConfig: n_init must be at least 1");
  if (length_sweep && (length_sweep->first == 0 || length_sweep->first > length_sweep->second)) {
    throw std::invalid_argument("AttackConfig: invalid length sweep range");
  }
}

AttackConfig attack_preset(std::string_view name) {
  AttackConfig c;  // lamp-cos defaults
  if (name == "lamp-cos") return c;
  if (name == "lamp-cos-nolm") {
    c.alpha_lm = 0.0;
    return c;
  }
  if (name == "lamp-cos-noreg") {
    c.alpha_reg = 0.0;
    return c;
  }
  if (name == "lamp-cos-nodiscrete") {
    c.discrete_steps = 0;
    return c;
  }
  if (name == "lamp-l1l2" || name == "lamp-l2") {
    c.loss = name == "lamp-l1l2" ? GradientLoss::Tag : GradientLoss::L2;
    c.alpha_tag = name == "lamp-l1l2" ? 0.01 : 0.0;
    c.alpha_lm = 60.0;
    c.alpha_reg = 25.0;
    return c;
  }
  if (name == "tag" || name == "dlg") {
    c.loss = name == "tag" ? GradientLoss::Tag : GradientLoss::L2;
    c.alpha_tag = name == "tag" ? 0.01 : 0.0;
    c.alpha_lm = 0.0;
    c.alpha_reg = 0.0;
    c.learning_rate = 0.1;
    c.decay = 1.0;
    c.discrete_steps = 0;
    c.n_init = 1;
    c.n_perm = 0;
    c.iterations = 50;  // 2500 continuous steps
    return c;
  }
  throw std::invalid_argument("unknown attack preset '" + std::string(name) + "'");
}

std::vector<std::string> attack_preset_names() {
  return {"lamp-cos", "lamp-l1l2", "lamp-l2", "tag", "dlg", "lamp-cos-nolm", "lamp-cos-noreg", "lamp-cos-nodiscrete"};
}

VocabularyProjector::VocabularyProjector(const Tensor& token_table, std::vector<TokenId> excluded)
    : unit_rows_(token_table), excluded_(token_table.rows(), 0) {
  for (TokenId id : excluded)
    if (id >= 0 && static_cast<std::size_t>(id) < excluded_.size()) excluded_[static_cast<std::size_t>(id)] = 1;
  for (std::size_t r = 0; r < unit_rows_.rows(); ++r) {
    auto row = unit_rows_.row_span(r);
    const double norm = l2_norm(row);
    if (norm == 0.0) {
      excluded_[r] = 1;
      continue;
    }
    for (double& v : row) v /= norm;
  }
}

std::vector<TokenId> VocabularyProjector::project(const Tensor& rows) const {
  if (rows.cols() != unit_rows_.cols()) throw std::invalid_argument("project_to_vocabulary: width mismatch");
  std::vector<TokenId> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    auto row = rows.row_span(i);
    const double norm = l2_norm(row);
    if (norm == 0.0) {
      throw std::invalid_argument("project_to_vocabulary: zero embedding at position " + std::to_string(i));
    }
    double best = -std::numeric_limits<double>::infinity();
    TokenId best_id = -1;
    for (std::size_t v = 0; v < unit_rows_.rows(); ++v) {
      if (excluded_[v]) continue;
      const double s = dot(row, unit_rows_.row_span(v)) / norm;
      if (s > best) {
        best = s;
        best_id = static_cast<TokenId>(v);
      }
    }
    if (best_id < 0) throw std::invalid_argument("project_to_vocabulary: no candidate tokens");
    out[i] = best_id;
  }
  return out;
}

std::vector<std::vector<TokenId>> VocabularyProjector::project(const EmbeddingSeq& x) const {
  std::vector<std::vector<TokenId>> out;
  out.reserve(x.size());
  for (const auto& xb : x) out.push_back(project(xb));
  return out;
}

std::vector<TokenId> project_to_vocabulary(const Tensor& rows, const Tensor& token_table) {
  return VocabularyProjector(token_table).project(rows);
}

ReconstructionObjective::ReconstructionObjective(const ClassifierModel& victim, const GradientSet& observed,
                                                 std::vector<int> labels, GradientLoss loss, double alpha_tag,
                                                 double alpha_reg)
    : victim_(&victim),
      labels_(std::move(labels)),
      loss_(loss),
      alpha_tag_(loss == GradientLoss::L2 ? 0.0 : alpha_tag),
      alpha_reg_(alpha_reg),
      mean_vocab_norm_(mean_row_norm(victim.token_table())) {
  if (!observed.same_layout(victim.params)) {
    throw std::invalid_argument("ReconstructionObjective: observed gradient does not match the victim's layers");
  }
  if (labels_.empty()) throw std::invalid_argument("ReconstructionObjective: no labels");
  double largest = 0.0;
  for (const auto& [name, t] : observed)
    if (name != kTokenTableName) largest = std::max(largest, l2_norm(t.data()));
  for (const auto& [name, t] : observed) {
    if (name == kTokenTableName || l2_norm(t.data()) <= kZeroNormTolerance * largest) continue;
    matched_.push_back(name);
    observed_.push_back(t);
  }
  if (matched_.empty()) throw std::invalid_argument("ReconstructionObjective: observed gradient is zero");
}

ObjectiveValue ReconstructionObjective::evaluate(const EmbeddingSeq& x) const { return run(x, nullptr); }

ObjectiveValue ReconstructionObjective::evaluate_with_gradient(const EmbeddingSeq& x, EmbeddingSeq& grad_x) const {
  return run(x, &grad_x);
}

GradientSet ReconstructionObjective::induced_gradient(const EmbeddingSeq& x) const {
  ad::Tape tape;
  BoundParams p(tape, victim_->params, true);
  std::vector<ad::Var> xs;
  for (const auto& xb : x) xs.push_back(tape.constant(xb));
  const ad::Var loss = classifier_batch_loss(p, victim_->config, xs, labels_);
  std::vector<ad::Var> wrt;
  for (const auto& name : matched_) wrt.push_back(p[name]);
  const auto grads = tape.backward(loss, wrt);
  GradientSet out;
  for (std::size_t i = 0; i < matched_.size(); ++i) out.set(matched_[i], grads[i].value());
  return out;
}

ObjectiveValue ReconstructionObjective::run(const EmbeddingSeq& x, EmbeddingSeq* grad_x) const {
  if (x.size() != labels_.size()) throw std::invalid_argument("ReconstructionObjective: batch size mismatch");
  ad::Tape tape;
  BoundParams p(tape, victim_->params, true);
  std::vector<ad::Var> xs;
  xs.reserve(x.size());
  for (const auto& xb : x) xs.push_back(grad_x ? tape.variable(xb) : tape.constant(xb));
  const ad::Var loss = classifier_batch_loss(p, victim_->config, xs, labels_);

  std::vector<ad::Var> wrt;
  wrt.reserve(matched_.size());
  for (const auto& name : matched_) wrt.push_back(p[name]);
  const std::vector<ad::Var> induced = tape.backward(loss, wrt, grad_x != nullptr);
  std::vector<ad::Var> observed;
  observed.reserve(observed_.size());
  for (const auto& t : observed_) observed.push_back(tape.constant(t));

  const ad::Var grad_term = loss_ == GradientLoss::Cos ? loss_cos(observed, induced)
                                                       : loss_tag(observed, induced, alpha_tag_);
  const ad::Var reg_term = loss_reg(xs, mean_vocab_norm_);
  const ad::Var total = alpha_reg_ == 0.0 ? grad_term : ad::add(grad_term, ad::scale(reg_term, alpha_reg_));

  if (grad_x) {
    const auto g = tape.backward(total, xs);
    grad_x->clear();
    for (const auto& gi : g) grad_x->push_back(gi.value());
  }
  return {total.value().item(), grad_term.value().item(), reg_term.value().item()};
}

double batch_perplexity(const LanguageModel& lm, const std::vector<std::vector<TokenId>>& tokens) {
  return PerplexityCache(&lm).batch(tokens);
}

EmbeddingSeq init_embeddings(const AttackConfig& config, const ReconstructionObjective& objective,
                             std::span<const std::size_t> lengths, std::size_t dim, std::mt19937_64& rng) {
  if (config.n_init == 0) throw std::invalid_argument("init_embeddings: n_init must be at least 1");
  // Entry scale chosen so that row norms start near the mean vocabulary norm.
  std::normal_distribution<double> gauss(0.0, objective.mean_vocab_norm() / std::sqrt(static_cast<double>(dim)));
  EmbeddingSeq best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < config.n_init; ++k) {
    EmbeddingSeq cand;
    for (std::size_t n : lengths) {
      if (n == 0) throw std::invalid_argument("init_embeddings: zero-length sequence");
      Tensor t(n, dim);
      for (double& v : t.data()) v = gauss(rng);
      cand.push_back(std::move(t));
    }
    if (config.n_init == 1) return cand;
    const double l = objective.evaluate(cand).grad_term;
    if (l < best_loss) {
      best_loss = l;
      best = std::move(cand);
    }
  }
  const EmbeddingSeq winner = best;
  for (std::size_t k = 0; k < config.n_perm; ++k) {
    EmbeddingSeq cand;
    for (const auto& xb : winner) {
      Permutation perm = identity_permutation(xb.rows());
      std::shuffle(perm.begin(), perm.end(), rng);
      cand.push_back(permute_rows(xb, perm));
    }
    const double l = objective.evaluate(cand).grad_term;
    if (l < best_loss) {
      best_loss = l;
      best = std::move(cand);
    }
  }
  return best;
}

bool accept_candidate(double rec_current, double lm_current, double rec_candidate, double lm_candidate,
                      double alpha_lm) {
  if (alpha_lm == 0.0) return rec_candidate < rec_current;
  return rec_candidate + alpha_lm * lm_candidate < rec_current + alpha_lm * lm_current;
}

const EmbeddingSeq& select_candidate(const EmbeddingSeq& x, const EmbeddingSeq& candidate,
                                     const ReconstructionObjective& objective,
                                     const VocabularyProjector& projector, const LanguageModel* lm,
                                     double alpha_lm) {
  const bool use_lm = lm != nullptr && alpha_lm != 0.0;
  const double lm_x = use_lm ? batch_perplexity(*lm, projector.project(x)) : 0.0;
  const double lm_c = use_lm ? batch_perplexity(*lm, projector.project(candidate)) : 0.0;
  const double rec_x = objective.evaluate(x).total;
  const double rec_c = objective.evaluate(candidate).total;
  return accept_candidate(rec_x, lm_x, rec_c, lm_c, alpha_lm) ? candidate : x;
}

ReconstructionResult run_attack(const ClassifierModel& victim, const GradientSet& observed, const LanguageModel* lm,
                                const AttackTarget& target, const AttackConfig& config) {
  config.validate();
  if (config.alpha_lm != 0.0 && lm == nullptr) {
    throw std::invalid_argument("run_attack: alpha_lm > 0 requires a language model");
  }
  if (lm && lm->vocab_size() != victim.config.vocab_size) {
    throw std::invalid_argument("run_attack: language model vocabulary differs from the victim's");
  }
  Deadline deadline;
  deadline.budget = config.time_budget_seconds;

  ReconstructionResult result;
  if (!config.length_sweep) {
    if (target.lengths.empty()) throw std::invalid_argument("run_attack: no target lengths");
    result = run_for_lengths(victim, observed, lm, target.lengths, target.labels, config, deadline);
  } else {
    const std::size_t batch = std::max<std::size_t>(1, std::max(target.lengths.size(), target.labels.size()));
    std::optional<ReconstructionResult> best;
    for (std::size_t n = config.length_sweep->first; n <= config.length_sweep->second; ++n) {
      const std::vector<std::size_t> lengths(batch, n);
      ReconstructionResult r = run_for_lengths(victim, observed, lm, lengths, target.labels, config, deadline);
      if (!best || r.final_l_rec < best->final_l_rec) best = std::move(r);
      if (best->truncated) break;
    }
    result = std::move(*best);
  }
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - deadline.start).count();
  return result;
}

}  // namespace gradleak
