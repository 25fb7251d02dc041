#include "gradleak/gradient_losses.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace gradleak {
namespace {

void check_pairs(std::span<const ad::Var> a, std::span<const ad::Var> b) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument("gradient loss: need matching non-empty layer lists");
  }
}

template <class Fn>
double on_constants(const GradientSet& observed, const GradientSet& candidate, Fn fn) {
  ad::Tape tape;
  std::vector<ad::Var> a, b;
  for (const auto& [name, t] : observed) {
    a.push_back(tape.constant(t));
    b.push_back(tape.constant(candidate.at(name)));
  }
  return fn(a, b).value().item();
}

}  // namespace

std::string_view to_string(GradientLoss loss) {
  switch (loss) {
    case GradientLoss::Cos: return "cos";
    case GradientLoss::Tag: return "tag";
    case GradientLoss::L2: return "l2";
  }
  return "?";
}

GradientLoss parse_gradient_loss(std::string_view name) {
  if (name == "cos") return GradientLoss::Cos;
  if (name == "tag") return GradientLoss::Tag;
  if (name == "l2") return GradientLoss::L2;
  throw std::invalid_argument("unknown gradient loss '" + std::string(name) + "'");
}

ad::Var loss_tag(std::span<const ad::Var> observed, std::span<const ad::Var> candidate, double alpha_tag) {
  check_pairs(observed, candidate);
  ad::Var total;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const ad::Var diff = ad::sub(observed[i], candidate[i]);
    ad::Var term = ad::l2_norm(diff);
    if (alpha_tag != 0.0) term = ad::add(term, ad::scale(ad::l1_norm(diff), alpha_tag));
    total = total.valid() ? ad::add(total, term) : term;
  }
  return total;
}

ad::Var loss_cos(std::span<const ad::Var> observed, std::span<const ad::Var> candidate,
                 std::size_t* degenerate_layers) {
  check_pairs(observed, candidate);
  ad::Tape& tape = observed[0].tape();
  std::vector<ad::Var> na, nb;
  double max_a = 0.0, max_b = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    na.push_back(ad::l2_norm(observed[i]));
    nb.push_back(ad::l2_norm(candidate[i]));
    max_a = std::max(max_a, na.back().value().item());
    max_b = std::max(max_b, nb.back().value().item());
  }
  std::size_t degenerate = 0;
  ad::Var total;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double a = na[i].value().item(), b = nb[i].value().item();
    if (a == 0.0 || b == 0.0 || a <= kZeroNormTolerance * max_a || b <= kZeroNormTolerance * max_b) {
      ++degenerate;
      continue;
    }
    const ad::Var cos = ad::div(ad::dot(observed[i], candidate[i]), ad::mul(na[i], nb[i]));
    total = total.valid() ? ad::add(total, cos) : cos;
  }
  if (degenerate_layers) *degenerate_layers = degenerate;
  if (!total.valid()) return tape.constant(Tensor::scalar(1.0));
  return ad::add_scalar(ad::scale(total, -1.0 / static_cast<double>(observed.size())), 1.0);
}

ad::Var loss_reg(std::span<const ad::Var> rows_per_element, double mean_vocab_norm) {
  if (rows_per_element.empty()) throw std::invalid_argument("loss_reg: no embeddings");
  ad::Var total;
  std::size_t count = 0;
  for (const ad::Var& x : rows_per_element) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const ad::Var norm = ad::l2_norm(ad::slice(x, 0, r, 1));
      total = total.valid() ? ad::add(total, norm) : norm;
      ++count;
    }
  }
  const ad::Var gap = ad::add_scalar(ad::scale(total, 1.0 / static_cast<double>(count)), -mean_vocab_norm);
  return ad::mul(gap, gap);
}

double mean_row_norm(const Tensor& table) {
  double total = 0.0;
  for (std::size_t r = 0; r < table.rows(); ++r) total += l2_norm(table.row_span(r));
  return total / static_cast<double>(table.rows());
}

double loss_tag(const GradientSet& observed, const GradientSet& candidate, double alpha_tag) {
  return on_constants(observed, candidate,
                      [&](auto& a, auto& b) { return loss_tag(a, b, alpha_tag); });
}

double loss_cos(const GradientSet& observed, const GradientSet& candidate, std::size_t* degenerate_layers) {
  return on_constants(observed, candidate,
                      [&](auto& a, auto& b) { return loss_cos(a, b, degenerate_layers); });
}

double loss_reg(std::span<const Tensor> rows_per_element, const Tensor& token_table) {
  ad::Tape tape;
  std::vector<ad::Var> xs;
  for (const auto& x : rows_per_element) xs.push_back(tape.constant(x));
  return loss_reg(xs, mean_row_norm(token_table)).value().item();
}

}  // namespace gradleak
