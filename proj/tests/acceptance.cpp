// Runs the eleven acceptance criteria and prints one PASS/FAIL line each.
// Exit status is nonzero iff any criterion fails. Experiment outputs go to
// $GRADLEAK_ACCEPTANCE_DIR (default ./acceptance_runs).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fd_oracle.hpp"
#include "gradleak/experiment.hpp"

using namespace gradleak;
using gradleak::testing::finite_difference;
using gradleak::testing::random_gaussian;
using gradleak::testing::random_tensor;
using gradleak::testing::relative_error;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

// ---------------------------------------------------------------- 1
// Random two-layer networks with attention-style mixing; first order is the
// gradient of a scalar head, second order differentiates the squared
// gradient norm. Odd cases use the classifier itself and the gradient-matching
// objective, whose gradient in x is a second derivative.
Outcome autodiff_soundness() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst1 = 0.0, worst2 = 0.0;
  for (int k = 0; k < 100; ++k) {
    if (k % 2 == 0) {
      std::uniform_int_distribution<std::size_t> d(2, 4);
      const std::size_t n = d(rng), m = d(rng), h = d(rng);
      const Tensor x0 = random_tensor(n, m, rng);
      const Tensor w1 = random_tensor(m, h, rng), w2 = random_tensor(h, m, rng), head = random_tensor(n, m, rng);
      auto build = [&](ad::Tape& t, ad::Var x) {
        const ad::Var a = ad::softmax_rows(ad::matmul(x, ad::transpose(x)));
        const ad::Var z = ad::gelu(ad::matmul(ad::matmul(a, x), t.constant(w1)));
        const ad::Var y = ad::layer_norm_rows(ad::add(x, ad::tanh(ad::matmul(z, t.constant(w2)))));
        return ad::dot(y, t.constant(head));
      };
      auto value = [&](const Tensor& xv) {
        ad::Tape t;
        return build(t, t.constant(xv)).value().item();
      };
      auto grad_sq = [&](const Tensor& xv) {
        ad::Tape t;
        const ad::Var x = t.variable(xv);
        const ad::Var g = t.backward(build(t, x), std::span(&x, 1))[0];
        return ad::sum(ad::mul(g, g)).value().item();
      };
      ad::Tape t;
      const ad::Var x = t.variable(x0);
      const ad::Var g = t.backward(build(t, x), std::span(&x, 1), true)[0];
      worst1 = std::max(worst1, relative_error(g.value(), finite_difference(value, x0)));
      const ad::Var gg = t.backward(ad::sum(ad::mul(g, g)), std::span(&x, 1))[0];
      worst2 = std::max(worst2, relative_error(gg.value(), finite_difference(grad_sq, x0), 1e-4));
    } else {
      ModelConfig mc;
      mc.vocab_size = 10;
      mc.dim = 8;
      mc.ff_dim = 16;
      mc.layers = 1 + static_cast<std::size_t>(k % 4 == 1);
      const ClassifierModel m = ClassifierModel::init(mc, static_cast<std::uint64_t>(k));
      std::uniform_int_distribution<TokenId> tok(3, 9);
      std::uniform_int_distribution<std::size_t> len(2, 4);
      TokenSequence truth;
      for (std::size_t i = len(rng); i > 0; --i) truth.ids.push_back(tok(rng));
      truth.label = static_cast<int>(k / 2 % 2);
      const Tensor x0 = random_gaussian(truth.ids.size(), mc.dim, rng, 0.3);

      ad::Tape t;
      const BoundParams p(t, m.params, false);
      const ad::Var x = t.variable(x0);
      const ad::Var loss = classifier_batch_loss(p, mc, std::span(&x, 1), std::span(&truth.label, 1));
      const Tensor g = t.backward(loss, std::span(&x, 1))[0].value();
      worst1 = std::max(worst1, relative_error(g, finite_difference([&](const Tensor& v) {
                                                 return classifier_loss(m, v, truth.label);
                                               }, x0)));

      const GradientSet observed = client_gradient(m, Batch::make({truth}));
      const ReconstructionObjective obj(m, observed, {truth.label}, k % 3 ? GradientLoss::Cos : GradientLoss::Tag,
                                        0.01, 1.0);
      EmbeddingSeq gx;
      obj.evaluate_with_gradient({x0}, gx);
      worst2 = std::max(worst2, relative_error(gx[0], finite_difference([&](const Tensor& v) {
                                                 return obj.evaluate({v}).total;
                                               }, x0), 1e-8));
    }
  }
  const double secs = seconds_since(start);
  return {worst1 <= 1e-4 && worst2 <= 1e-3 && secs < 60.0,
          "100 cases, worst rel. err. first " + fmt("%.2e", worst1) + ", second " + fmt("%.2e", worst2) + ", " +
              fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------- 2
Outcome loss_identities() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> layers(1, 5), dim(1, 6);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  double worst_tag = 0.0, worst_cos = 0.0, worst_reg = 0.0;
  bool in_range = true;
  for (int trial = 0; trial < 100; ++trial) {
    GradientSet g, c, other;
    const double s = scale(rng);
    for (std::size_t i = layers(rng); i > 0; --i) {
      const Tensor t = random_gaussian(dim(rng), dim(rng), rng);
      Tensor ct = t;
      for (double& v : ct.data()) v *= s;
      const std::string name = "l" + std::to_string(i);
      g.set(name, t);
      c.set(name, ct);
      other.set(name, random_gaussian(t.rows(), t.cols(), rng));
    }
    worst_tag = std::max(worst_tag, std::abs(loss_tag(g, g, 0.01)));
    worst_cos = std::max(worst_cos, std::abs(loss_cos(g, c)));
    const double r = loss_cos(g, other);
    in_range = in_range && r >= 0.0 && r <= 2.0;

    const Tensor vocab = random_gaussian(12, 5, rng);
    std::vector<Tensor> xs;
    double total = 0.0;
    std::size_t rows = 0;
    for (std::size_t b = 1 + trial % 3; b > 0; --b) {
      xs.push_back(random_gaussian(dim(rng), 5, rng));
      for (std::size_t q = 0; q < xs.back().rows(); ++q) total += l2_norm(xs.back().row_span(q));
      rows += xs.back().rows();
    }
    const double k = mean_row_norm(vocab) / (total / static_cast<double>(rows));
    for (auto& x : xs)
      for (double& v : x.data()) v *= k;
    worst_reg = std::max(worst_reg, loss_reg(xs, vocab));
  }
  return {worst_tag <= 1e-10 && worst_cos <= 1e-10 && worst_reg <= 1e-10 && in_range,
          "max |tag(g,g)| " + fmt("%.1e", worst_tag) + ", max |cos(g,cg)| " + fmt("%.1e", worst_cos) +
              ", max reg " + fmt("%.1e", worst_reg) + (in_range ? ", cos in [0,2]" : ", cos OUT OF RANGE")};
}

// ---------------------------------------------------------------- 3
Outcome perplexity_formula() {
  std::mt19937_64 rng(303);
  double worst = 0.0;
  for (std::size_t vocab : {5, 17, 300}) {
    const UniformLm lm(vocab);
    std::uniform_int_distribution<TokenId> tok(0, static_cast<TokenId>(vocab) - 1);
    for (std::size_t n = 2; n <= 30; ++n) {
      std::vector<TokenId> ids(n);
      for (auto& t : ids) t = tok(rng);
      const double expected = static_cast<double>(n - 1) / static_cast<double>(n) * std::log(static_cast<double>(vocab));
      worst = std::max(worst, std::abs(lm_perplexity(lm, ids) - expected));
    }
  }
  return {worst <= 1e-12, "max deviation from ((n-1)/n) ln V: " + fmt("%.1e", worst)};
}

// ---------------------------------------------------------------- 4
Outcome transformations() {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<std::size_t> len(2, 12);
  std::size_t bad = 0;
  for (Transform kind : kAllTransforms) {
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = len(rng);
      const Tensor x = random_gaussian(n, 3, rng);
      const Tensor y = transform(x, kind, rng);
      if (y.rows() != n) {
        ++bad;
        continue;
      }
      std::multiset<std::vector<double>> a, b;
      for (std::size_t r = 0; r < n; ++r) {
        a.emplace(x.row_span(r).begin(), x.row_span(r).end());
        b.emplace(y.row_span(r).begin(), y.row_span(r).end());
      }
      if (a != b) ++bad;
    }
  }
  // Reachable MoveToken outcomes: take token i out, put it back right after token j.
  std::size_t outside = 0;
  for (std::size_t n = 2; n <= 5; ++n) {
    std::set<Permutation> reachable{identity_permutation(n)};
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        Permutation p = identity_permutation(n);
        p.erase(std::find(p.begin(), p.end(), i));
        p.insert(std::find(p.begin(), p.end(), j) + 1, i);
        reachable.insert(p);
      }
    for (int k = 0; k < 2000; ++k)
      if (!reachable.count(random_transform(Transform::MoveToken, n, rng))) ++outside;
  }
  return {bad == 0 && outside == 0, "4000 applications, " + std::to_string(bad) + " multiset/length violations; " +
                                        std::to_string(outside) + " MoveToken outcomes outside the reachable set"};
}

// ---------------------------------------------------------------- 10
double f1(double overlap, double ref, double cand) {
  if (overlap == 0.0 || ref == 0.0 || cand == 0.0) return 0.0;
  const double p = overlap / cand, r = overlap / ref;
  return 100.0 * 2.0 * p * r / (p + r);
}

double ngram_oracle(const std::vector<TokenId>& ref, const std::vector<TokenId>& cand, std::size_t n) {
  if (n == 2 && ref.size() == 1 && cand.size() == 1) return ref[0] == cand[0] ? 100.0 : 0.0;
  std::map<std::vector<TokenId>, int> a, b;
  for (std::size_t i = 0; i + n <= ref.size(); ++i) ++a[{ref.begin() + i, ref.begin() + i + n}];
  for (std::size_t i = 0; i + n <= cand.size(); ++i) ++b[{cand.begin() + i, cand.begin() + i + n}];
  double overlap = 0.0;
  for (const auto& [g, c] : a)
    if (b.count(g)) overlap += std::min(c, b[g]);
  return f1(overlap, static_cast<double>(ref.size() + 1 - std::min(n, ref.size() + 1)),
            static_cast<double>(cand.size() + 1 - std::min(n, cand.size() + 1)));
}

std::size_t lcs_oracle(const std::vector<TokenId>& a, const std::vector<TokenId>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t[a.size()][b.size()];
}

Outcome metric_oracles() {
  std::mt19937_64 rng(1010);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  std::uniform_int_distribution<TokenId> tok(3, 8);
  std::size_t rouge_bad = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TokenId> ref(len(rng)), cand(len(rng));
    for (auto& t : ref) t = tok(rng);
    for (auto& t : cand) t = tok(rng);
    const RougeScores s = rouge(ref, cand);
    const double rl = f1(static_cast<double>(lcs_oracle(ref, cand)), static_cast<double>(ref.size()),
                         static_cast<double>(cand.size()));
    if (std::abs(s.r1 - ngram_oracle(ref, cand, 1)) > 1e-9 || std::abs(s.r2 - ngram_oracle(ref, cand, 2)) > 1e-9 ||
        std::abs(s.rl - rl) > 1e-9)
      ++rouge_bad;
  }
  std::size_t mcc_bad = 0;
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = len(rng) * 3;
    std::vector<int> p(n), y(n);
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = coin(rng);
      y[i] = coin(rng);
      (p[i] ? (y[i] ? tp : fp) : (y[i] ? fn : tn)) += 1;
    }
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    const double expected = den == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(den);
    if (std::abs(mcc(p, y) - expected) > 1e-12) ++mcc_bad;
  }
  return {rouge_bad == 0 && mcc_bad == 0, std::to_string(200 - rouge_bad) + "/200 rouge pairs and " +
                                              std::to_string(200 - mcc_bad) + "/200 mcc vectors match the oracles"};
}

// ---------------------------------------------------------------- experiments
struct Scores {
  std::vector<double> r1, r2, rl;
};

Scores scores_of(const ExperimentReport& rep, const std::string& variant, std::size_t batch_size) {
  Scores s;
  for (const auto& r : rep.runs) {
    if (r.variant != variant || r.batch_size != batch_size) continue;
    // A failed run scores zero rather than vanishing from the comparison.
    s.r1.push_back(r.ok ? r.rouge.scores.r1 : 0.0);
    s.r2.push_back(r.ok ? r.rouge.scores.r2 : 0.0);
    s.rl.push_back(r.ok ? r.rouge.scores.rl : 0.0);
  }
  return s;
}

double paired_stderr(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
  return stderr_of(d);
}

std::string mean_se(const std::vector<double>& v) { return fmt("%.1f", mean_of(v)) + "+-" + fmt("%.1f", stderr_of(v)); }

Outcome oracle_recovery(const ExperimentReport& rep, double secs) {
  const Scores s = scores_of(rep, "lamp-cos", 1);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < s.r1.size(); ++i)
    if (s.r1[i] == 100.0 && s.r2[i] == 100.0 && s.rl[i] == 100.0) ++exact;
  const bool enough = s.r1.size() == 20;
  const bool pass = enough && exact * 10 >= s.r1.size() * 6 && mean_of(s.r1) >= 90.0 && secs <= 600.0;
  return {pass, std::to_string(exact) + "/" + std::to_string(s.r1.size()) + " exact, mean R-1 " +
                    fmt("%.1f", mean_of(s.r1)) + ", " + fmt("%.0f", secs) + " s"};
}

Outcome ablation_direction(const ExperimentReport& rep) {
  const Scores full = scores_of(rep, "lamp-cos", 1);
  bool pass = full.r2.size() >= 20;
  std::string detail = "R-2 lamp-cos " + mean_se(full.r2);
  for (const char* other : {"lamp-cos-nodiscrete", "lamp-cos-nolm"}) {
    const Scores o = scores_of(rep, other, 1);
    const double margin = mean_of(full.r2) - mean_of(o.r2);
    const double se = std::max({paired_stderr(full.r2, o.r2), stderr_of(full.r2), stderr_of(o.r2)});
    pass = pass && o.r2.size() == full.r2.size() && margin > se;
    detail += std::string(", ") + other + " " + mean_se(o.r2) + " (margin " + fmt("%.1f", margin) + " vs SE " +
              fmt("%.1f", se) + ")";
  }
  return {pass, detail + " over " + std::to_string(full.r2.size()) + " runs"};
}

Outcome baseline_direction(const ExperimentReport& rep) {
  const Scores full = scores_of(rep, "lamp-cos", 1);
  const Scores tag = scores_of(rep, "tag", 1);
  const Scores dlg = scores_of(rep, "dlg", 1);
  const bool pass = full.r2.size() >= 20 && mean_of(full.r2) > mean_of(tag.r2) && mean_of(full.r2) > mean_of(dlg.r2);
  return {pass, "R-2 lamp-cos " + mean_se(full.r2) + ", tag " + mean_se(tag.r2) + ", dlg " + mean_se(dlg.r2)};
}

Outcome defense_direction(const Scores& none, const Scores& low, const Scores& high) {
  // Adjacent levels may invert by at most one standard error of the paired difference.
  auto not_above = [](const Scores& noisier, const Scores& cleaner) {
    return mean_of(noisier.r2) <= mean_of(cleaner.r2) + paired_stderr(noisier.r2, cleaner.r2);
  };
  const bool pass = none.r2.size() >= 20 && not_above(high, low) && not_above(low, none) &&
                    mean_of(high.r2) <= mean_of(none.r2);
  return {pass, "R-2 sigma 0: " + mean_se(none.r2) + ", 0.001: " + mean_se(low.r2) + ", 0.002: " +
                    mean_se(high.r2)};
}

Outcome batch_capability(const Scores& b1, const Scores& b2) {
  const bool pass = !b2.r1.empty() && mean_of(b2.r1) >= 0.5 * mean_of(b1.r1);
  return {pass, "mean R-1 B=2 " + fmt("%.1f", mean_of(b2.r1)) + " vs B=1 " + fmt("%.1f", mean_of(b1.r1)) + " (" +
                    std::to_string(b2.r1.size()) + " batches)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& root, const std::string& corpus) {
  const fs::path dir = root / "determinism";
  const fs::path first = root / "determinism_first";
  fs::remove_all(dir);
  fs::remove_all(first);
  Json variant{{"name", "lamp-cos"}, {"preset", "lamp-cos"}, {"n_init", 20}, {"n_perm", 20}, {"iterations", 4}};
  const ExperimentConfig c = experiment_config_from_json(Json{{"corpus", corpus},
                                                              {"output_dir", dir.string()},
                                                              {"variants", {variant, "tag"}},
                                                              {"defense", {{"sigma", 0.001}, {"seed", 5}}},
                                                              {"batch_sizes", {1, 2}},
                                                              {"max_length", 5},
                                                              {"max_sequences", 4},
                                                              {"seeds", {0, 1}}});
  const char* old = std::getenv("GRADLEAK_WORKERS");
  const std::string saved = old ? old : "";
  setenv("GRADLEAK_WORKERS", "1", 1);
  run_experiment(c);
  fs::rename(dir, first);
  setenv("GRADLEAK_WORKERS", "4", 1);
  run_experiment(c);
  if (old) setenv("GRADLEAK_WORKERS", saved.c_str(), 1);
  else unsetenv("GRADLEAK_WORKERS");

  std::size_t same = 0, differ = 0;
  for (const auto& e : fs::recursive_directory_iterator(first)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    const fs::path other = dir / fs::relative(e.path(), first);
    (fs::exists(other) && slurp(other) == slurp(e.path()) ? same : differ) += 1;
  }
  return {differ == 0 && same > 0, std::to_string(same) + " result files byte-identical, " + std::to_string(differ) +
                                       " differ (1 vs 4 workers)"};
}

}  // namespace

int main() {
  const char* env_dir = std::getenv("GRADLEAK_ACCEPTANCE_DIR");
  const fs::path root = env_dir ? fs::path(env_dir) : fs::path("acceptance_runs");
  fs::create_directories(root);
  const std::string corpus = std::string(GRADLEAK_SOURCE_DIR) + "/data/toy_corpus.tsv";

  std::map<int, Outcome> results;
  auto report = [&](int id, const char* name, const Outcome& o) {
    results[id] = o;
    std::printf("%s criterion %2d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };
  auto guarded = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    try {
      report(id, name, fn());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "autodiff soundness", autodiff_soundness);
  guarded(2, "loss identities", loss_identities);
  guarded(3, "perplexity formula", perplexity_formula);
  guarded(4, "transformations", transformations);

  // One victim and LM serve criteria 5-9.
  ExperimentConfig base;
  base.corpus_path = corpus;
  base.lm_corpus_path = std::string(GRADLEAK_SOURCE_DIR) + "/data/lm_corpus.tsv";
  std::optional<PreparedModels> prepared;
  try {
    prepared = prepare_models(base);
    std::printf("     victim test MCC %.3f\n", prepared->test_mcc);
  } catch (const std::exception& e) {
    std::printf("     model preparation failed: %s\n", e.what());
  }
  auto experiment = [&](const std::string& name, ExperimentConfig c) {
    if (!prepared) throw std::runtime_error("no trained models");
    c.output_dir = (root / name).string();
    fs::remove_all(c.output_dir);
    return run_experiment(c, *prepared);
  };
  auto variants = [](std::initializer_list<const char*> names) {
    std::vector<AttackVariant> out;
    for (const char* n : names) out.push_back({n, attack_preset(n)});
    return out;
  };

  guarded(5, "oracle recovery", [&] {
    ExperimentConfig c = base;
    c.variants = variants({"lamp-cos"});
    c.max_length = 4;
    c.max_sequences = 20;
    const auto start = std::chrono::steady_clock::now();
    const ExperimentReport rep = experiment("short", c);
    return oracle_recovery(rep, seconds_since(start));
  });

  ExperimentConfig longer = base;
  longer.min_length = 6;
  longer.max_length = 10;
  longer.max_sequences = 20;
  std::optional<ExperimentReport> main_rep;
  try {
    ExperimentConfig c = longer;
    c.variants = variants({"lamp-cos", "lamp-cos-nodiscrete", "lamp-cos-nolm", "tag", "dlg"});
    main_rep = experiment("ablation", c);
  } catch (const std::exception& e) {
    std::printf("     ablation experiment failed: %s\n", e.what());
  }
  guarded(6, "ablation direction", [&] {
    if (!main_rep) throw std::runtime_error("experiment failed");
    return ablation_direction(*main_rep);
  });
  guarded(7, "baseline direction", [&] {
    if (!main_rep) throw std::runtime_error("experiment failed");
    return baseline_direction(*main_rep);
  });
  guarded(8, "defense direction", [&] {
    if (!main_rep) throw std::runtime_error("experiment failed");
    ExperimentConfig c = longer;
    c.variants = variants({"lamp-cos"});
    c.defense = {0.001, 8};
    const ExperimentReport low = experiment("defense_0.001", c);
    c.defense = {0.002, 8};
    const ExperimentReport high = experiment("defense_0.002", c);
    return defense_direction(scores_of(*main_rep, "lamp-cos", 1), scores_of(low, "lamp-cos", 1),
                             scores_of(high, "lamp-cos", 1));
  });
  guarded(9, "batch capability", [&] {
    if (!main_rep) throw std::runtime_error("experiment failed");
    ExperimentConfig c = longer;
    c.variants = variants({"lamp-cos"});
    c.batch_sizes = {2};
    const ExperimentReport b2 = experiment("batch2", c);
    return batch_capability(scores_of(*main_rep, "lamp-cos", 1), scores_of(b2, "lamp-cos", 2));
  });
  guarded(10, "metric oracles", metric_oracles);
  guarded(11, "determinism", [&] { return determinism(root, corpus); });

  std::size_t passed = 0;
  for (const auto& [id, o] : results) passed += o.pass;
  std::printf("%zu/%zu criteria passed\n", passed, results.size());
  return passed == results.size() ? 0 : 1;
}
