#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fd_oracle.hpp"
#include "gradleak/gradient_losses.hpp"

using namespace gradleak;
using gradleak::testing::finite_difference;
using gradleak::testing::random_gaussian;
using gradleak::testing::random_tensor;
using gradleak::testing::relative_error;

namespace {

GradientSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> layers(1, 5), dim(1, 6);
  GradientSet g;
  const std::size_t n = layers(rng);
  for (std::size_t i = 0; i < n; ++i) g.set("layer" + std::to_string(i), random_gaussian(dim(rng), dim(rng), rng));
  return g;
}

GradientSet map(const GradientSet& g, double scale, double shift = 0.0) {
  GradientSet out;
  for (const auto& [name, t] : g) {
    Tensor c = t;
    for (double& v : c.data()) v = scale * v + shift;
    out.set(name, c);
  }
  return out;
}

GradientSet one_layer(std::vector<double> values) {
  GradientSet g;
  const std::size_t n = values.size();
  g.set("w", Tensor(1, n, std::move(values)));
  return g;
}

}  // namespace

TEST_CASE("loss_tag examples") {
  std::mt19937_64 rng(1);
  const GradientSet g = random_set(rng);
  CHECK(loss_tag(g, g, 0.01) == 0.0);
  CHECK(loss_tag(one_layer({3, 4}), one_layer({0, 0}), 0.01) == doctest::Approx(5.07).epsilon(1e-14));
  CHECK(loss_tag(one_layer({3, 4}), one_layer({0, 0}), 0.0) == doctest::Approx(5.0).epsilon(1e-14));

  // Degree-one homogeneity in the difference.
  const GradientSet h = random_set(rng);
  GradientSet base = map(h, 0.0);
  for (const auto& [name, t] : h) base.set(name, random_gaussian(t.rows(), t.cols(), rng));
  GradientSet doubled;
  for (std::size_t i = 0; i < h.size(); ++i) {
    Tensor c = base.entries()[i].second;
    const Tensor& d = h.entries()[i].second;
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += 2.0 * (d[k] - c[k]);
    doubled.set(h.entries()[i].first, c);
  }
  CHECK(loss_tag(base, doubled, 0.01) == doctest::Approx(2.0 * loss_tag(base, h, 0.01)).epsilon(1e-12));
}

TEST_CASE("loss_cos examples") {
  GradientSet a, orth, neg;
  a.set("x", Tensor::row({1, 0, 2}));
  a.set("y", Tensor::row({0, 3}));
  orth.set("x", Tensor::row({0, 5, 0}));
  orth.set("y", Tensor::row({-1, 0}));
  neg = map(a, -1.0);
  CHECK(loss_cos(a, map(a, 3.5)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(loss_cos(a, orth) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(loss_cos(a, neg) == doctest::Approx(2.0).epsilon(1e-15));

  // A zero layer contributes cosine 0 and is reported.
  GradientSet z = a;
  z.set("y", Tensor::row({0, 0}));
  std::size_t degenerate = 0;
  CHECK(loss_cos(a, z, &degenerate) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(degenerate == 1);
  // Round-off sized layers count as zero.
  z.set("y", Tensor::row({1e-18, 0}));
  CHECK(loss_cos(a, z, &degenerate) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(degenerate == 1);
}

TEST_CASE("gradient-loss identities over 100 random sets") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const GradientSet g = random_set(rng);
    CHECK(loss_tag(g, g, 0.01) == 0.0);
    CHECK(std::abs(loss_cos(g, map(g, scale(rng)))) < 1e-10);
    const GradientSet h = random_set(rng);
    if (h.same_layout(g)) continue;
    GradientSet other;
    for (const auto& [name, t] : g) other.set(name, random_gaussian(t.rows(), t.cols(), rng));
    const double c = loss_cos(g, other);
    CHECK(c >= 0.0);
    CHECK(c <= 2.0);
  }
}

TEST_CASE("loss_reg examples") {
  // Rows copied from the vocabulary: any selection with the vocabulary's mean norm.
  const Tensor table(3, 2, {3, 4, 0, 5, -5, 0});  // all norms 5
  const Tensor rows[] = {Tensor(2, 2, {0, 5, 3, 4})};
  CHECK(loss_reg(rows, table) == 0.0);

  const Tensor unit(2, 2, {1, 0, 0, 1});
  const Tensor twos[] = {Tensor(3, 2, {2, 0, 0, 2, 0, -2})};
  CHECK(loss_reg(twos, unit) == doctest::Approx(1.0).epsilon(1e-15));

  // Quadratic in a common scale t, minimised at t = mean||e|| / mean||x||.
  std::mt19937_64 rng(3);
  const Tensor vocab = random_gaussian(10, 4, rng);
  const Tensor x = random_gaussian(3, 4, rng);
  const double mean_x = (l2_norm(x.row_span(0)) + l2_norm(x.row_span(1)) + l2_norm(x.row_span(2))) / 3.0;
  const double t_star = mean_row_norm(vocab) / mean_x;
  auto at = [&](double t) {
    Tensor s = x;
    for (double& v : s.data()) v *= t;
    const Tensor r[] = {s};
    return loss_reg(r, vocab);
  };
  CHECK(at(t_star) < 1e-20);
  for (double t : {0.2, 0.5, 1.5, 3.0}) {
    const double expected = std::pow((t - t_star) * mean_x, 2);
    CHECK(at(t) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("loss_reg vanishes at matched mean norms over 100 random sets") {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> count(1, 4), len(1, 6);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor vocab = random_gaussian(8, 5, rng);
    std::vector<Tensor> xs;
    double total = 0.0;
    std::size_t rows = 0;
    for (std::size_t b = count(rng); b > 0; --b) {
      xs.push_back(random_gaussian(len(rng), 5, rng));
      for (std::size_t r = 0; r < xs.back().rows(); ++r) total += l2_norm(xs.back().row_span(r));
      rows += xs.back().rows();
    }
    const double s = mean_row_norm(vocab) / (total / static_cast<double>(rows));
    for (auto& x : xs)
      for (double& v : x.data()) v *= s;
    CHECK(loss_reg(xs, vocab) < 1e-10);
  }
}

TEST_CASE("differentiable losses match finite differences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor obs0 = random_gaussian(2, 3, rng), obs1 = random_gaussian(1, 4, rng);
    const Tensor c0 = random_gaussian(2, 3, rng), c1 = random_gaussian(1, 4, rng);
    for (int which = 0; which < 3; ++which) {
      auto eval = [&](const Tensor& cand0, bool grad, Tensor* g) {
        ad::Tape tape;
        const ad::Var o[] = {tape.constant(obs0), tape.constant(obs1)};
        const ad::Var v0 = grad ? tape.variable(cand0) : tape.constant(cand0);
        const ad::Var c[] = {v0, tape.constant(c1)};
        ad::Var l = which == 0 ? loss_tag(o, c, 0.01) : which == 1 ? loss_cos(o, c) : loss_reg(c, 1.3);
        if (g) {
          const ad::Var w[] = {v0};
          *g = tape.backward(l, w)[0].value();
        }
        return l.value().item();
      };
      Tensor g;
      eval(c0, true, &g);
      const Tensor fd = finite_difference([&](const Tensor& t) { return eval(t, false, nullptr); }, c0);
      CAPTURE(which);
      CHECK(relative_error(g, fd) < 1e-6);
    }
  }
}

TEST_CASE("gradient loss names") {
  CHECK(parse_gradient_loss("cos") == GradientLoss::Cos);
  CHECK(parse_gradient_loss("tag") == GradientLoss::Tag);
  CHECK(parse_gradient_loss("l2") == GradientLoss::L2);
  CHECK(to_string(GradientLoss::Tag) == "tag");
  CHECK_THROWS(parse_gradient_loss("l3"));
}
