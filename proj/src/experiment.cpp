#include "gradleak/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gradleak {
namespace fs = std::filesystem;

namespace {

Json train_config_to_json(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"learning_rate", c.learning_rate},
              {"seed", c.seed},
              {"gradient_noise_sigma", c.gradient_noise_sigma}};
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.seed = j.value("seed", c.seed);
  c.gradient_noise_sigma = j.value("gradient_noise_sigma", c.gradient_noise_sigma);
  return c;
}

std::string join_text(const Vocab& vocab, const std::vector<std::vector<TokenId>>& seqs) {
  std::string out;
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    if (b) out += " | ";
    out += vocab.detokenize(seqs[b]);
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = a * 0x9e3779b97f4a7c15ULL;
  h ^= b + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
  h ^= c + 0x85ebca77c2b2ae63ULL + (h << 6) + (h >> 2);
  return h;
}

std::string run_file_stem(const RunRecord& r) {
  std::ostringstream s;
  s << "b" << r.batch_size << "_" << std::setw(3) << std::setfill('0') << r.batch_index << "_s" << r.seed;
  return s.str();
}

Json rouge_json(const RougeScores& s) { return Json{{"r1", s.r1}, {"r2", s.r2}, {"rl", s.rl}}; }

std::string fixed(double v, int precision = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

template <class Fn>
void run_parallel(std::size_t jobs, std::size_t workers, Fn fn) {
  workers = std::max<std::size_t>(1, std::min(workers, jobs));
  std::atomic<std::size_t> next{0};
  auto loop = [&] {
    for (std::size_t i = next++; i < jobs; i = next++) fn(i);
  };
  if (workers == 1) {
    loop();
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
  for (auto& t : pool) t.join();
}

}  // namespace

AttackConfig attack_config_from_json(const Json& j) {
  if (j.is_string()) return attack_preset(j.get<std::string>());
  AttackConfig c = attack_preset(j.value("preset", std::string("lamp-cos")));
  if (j.contains("loss")) c.loss = parse_gradient_loss(j.at("loss").get<std::string>());
  c.alpha_tag = j.value("alpha_tag", c.alpha_tag);
  c.alpha_lm = j.value("alpha_lm", c.alpha_lm);
  c.alpha_reg = j.value("alpha_reg", c.alpha_reg);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.decay = j.value("decay", c.decay);
  c.decay_interval = j.value("decay_interval", c.decay_interval);
  c.n_init = j.value("n_init", c.n_init);
  c.n_perm = j.value("n_perm", c.n_perm);
  c.iterations = j.value("iterations", c.iterations);
  c.continuous_steps = j.value("continuous_steps", c.continuous_steps);
  c.discrete_steps = j.value("discrete_steps", c.discrete_steps);
  c.seed = j.value("seed", c.seed);
  if (j.contains("label_mode")) {
    const auto mode = j.at("label_mode").get<std::string>();
    if (mode == "known") c.label_mode = LabelMode::Known;
    else if (mode == "enumerate") c.label_mode = LabelMode::Enumerate;
    else throw std::invalid_argument("unknown label_mode '" + mode + "'");
  }
  c.snapshot_interval = j.value("snapshot_interval", c.snapshot_interval);
  c.time_budget_seconds = j.value("time_budget_seconds", c.time_budget_seconds);
  if (j.contains("length_sweep") && !j.at("length_sweep").is_null()) {
    const auto r = j.at("length_sweep").get<std::vector<std::size_t>>();
    if (r.size() != 2) throw std::invalid_argument("length_sweep must be [min, max]");
    c.length_sweep = std::make_pair(r[0], r[1]);
  }
  c.validate();
  return c;
}

Json attack_config_to_json(const AttackConfig& c) {
  Json j{{"loss", std::string(to_string(c.loss))},
         {"alpha_tag", c.alpha_tag},
         {"alpha_lm", c.alpha_lm},
         {"alpha_reg", c.alpha_reg},
         {"learning_rate", c.learning_rate},
         {"decay", c.decay},
         {"decay_interval", c.decay_interval},
         {"n_init", c.n_init},
         {"n_perm", c.n_perm},
         {"iterations", c.iterations},
         {"continuous_steps", c.continuous_steps},
         {"discrete_steps", c.discrete_steps},
         {"seed", c.seed},
         {"label_mode", c.label_mode == LabelMode::Known ? "known" : "enumerate"},
         {"snapshot_interval", c.snapshot_interval},
         {"time_budget_seconds", c.time_budget_seconds}};
  j["length_sweep"] = c.length_sweep ? Json{c.length_sweep->first, c.length_sweep->second} : Json(nullptr);
  return j;
}

void ExperimentConfig::validate() const {
  if (corpus_path.empty()) throw std::invalid_argument("experiment: corpus path is required");
  if (!fs::exists(corpus_path)) throw std::invalid_argument("experiment: corpus '" + corpus_path + "' not found");
  if (!lm_corpus_path.empty() && !fs::exists(lm_corpus_path)) {
    throw std::invalid_argument("experiment: LM corpus '" + lm_corpus_path + "' not found");
  }
  for (const auto* p : {&victim_checkpoint, &lm_checkpoint}) {
    if (!p->empty() && !fs::exists(*p)) throw std::invalid_argument("experiment: checkpoint '" + *p + "' not found");
  }
  if (variants.empty()) throw std::invalid_argument("experiment: no attack variants");
  std::set<std::string> names;
  for (const auto& v : variants) {
    if (v.name.empty() || v.name.find('/') != std::string::npos) {
      throw std::invalid_argument("experiment: invalid variant name '" + v.name + "'");
    }
    if (!names.insert(v.name).second) throw std::invalid_argument("experiment: duplicate variant '" + v.name + "'");
    v.config.validate();
  }
  if (batch_sizes.empty() || std::count(batch_sizes.begin(), batch_sizes.end(), std::size_t{0})) {
    throw std::invalid_argument("experiment: batch sizes must be positive");
  }
  if (seeds.empty()) throw std::invalid_argument("experiment: at least one seed is required");
  if (defense.sigma < 0) throw std::invalid_argument("experiment: defense sigma must be >= 0");
  if (min_length > max_length) throw std::invalid_argument("experiment: min_length exceeds max_length");
  if (target_pool != "test" && target_pool != "hyper") {
    throw std::invalid_argument("experiment: target_pool must be 'test' or 'hyper'");
  }
}

ExperimentConfig experiment_config_from_json(const Json& j) {
  ExperimentConfig c;
  c.corpus_path = j.at("corpus").get<std::string>();
  c.output_dir = j.value("output_dir", c.output_dir);
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"));
  if (j.contains("lm")) c.lm = lm_config_from_json(j.at("lm"));
  if (j.contains("classifier_training"))
    c.classifier_training = train_config_from_json(j.at("classifier_training"), c.classifier_training);
  if (j.contains("lm_training")) c.lm_training = train_config_from_json(j.at("lm_training"), c.lm_training);
  c.victim_checkpoint = j.value("victim_checkpoint", c.victim_checkpoint);
  c.lm_checkpoint = j.value("lm_checkpoint", c.lm_checkpoint);
  c.lm_corpus_path = j.value("lm_corpus", c.lm_corpus_path);
  c.use_lm = j.value("use_lm", c.use_lm);
  for (const auto& v : j.at("variants")) {
    AttackVariant variant;
    if (v.is_string()) {
      variant.name = v.get<std::string>();
      variant.config = attack_preset(variant.name);
    } else {
      variant.name = v.value("name", v.value("preset", std::string("lamp-cos")));
      variant.config = attack_config_from_json(v);
    }
    c.variants.push_back(std::move(variant));
  }
  if (j.contains("defense")) {
    c.defense.sigma = j.at("defense").value("sigma", 0.0);
    c.defense.seed = j.at("defense").value("seed", std::uint64_t{0});
  }
  c.batch_sizes = j.value("batch_sizes", c.batch_sizes);
  c.num_test = j.value("num_test", c.num_test);
  c.num_hyper = j.value("num_hyper", c.num_hyper);
  c.split_seed = j.value("split_seed", c.split_seed);
  c.min_length = j.value("min_length", c.min_length);
  c.max_length = j.value("max_length", c.max_length);
  c.max_sequences = j.value("max_sequences", c.max_sequences);
  c.seeds = j.value("seeds", c.seeds);
  c.target_pool = j.value("target_pool", c.target_pool);
  return c;
}

Json experiment_config_to_json(const ExperimentConfig& c) {
  Json variants = Json::array();
  for (const auto& v : c.variants) {
    Json a = attack_config_to_json(v.config);
    a["name"] = v.name;
    variants.push_back(std::move(a));
  }
  return Json{{"corpus", c.corpus_path},
              {"output_dir", c.output_dir},
              {"model", model_config_to_json(c.model)},
              {"lm", lm_config_to_json(c.lm)},
              {"classifier_training", train_config_to_json(c.classifier_training)},
              {"lm_training", train_config_to_json(c.lm_training)},
              {"victim_checkpoint", c.victim_checkpoint},
              {"lm_checkpoint", c.lm_checkpoint},
              {"lm_corpus", c.lm_corpus_path},
              {"use_lm", c.use_lm},
              {"variants", variants},
              {"defense", Json{{"sigma", c.defense.sigma}, {"seed", c.defense.seed}}},
              {"batch_sizes", c.batch_sizes},
              {"num_test", c.num_test},
              {"num_hyper", c.num_hyper},
              {"split_seed", c.split_seed},
              {"min_length", c.min_length},
              {"max_length", c.max_length},
              {"max_sequences", c.max_sequences},
              {"seeds", c.seeds},
              {"target_pool", c.target_pool}};
}

std::size_t worker_count() {
  if (const char* env = std::getenv("GRADLEAK_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
  std::vector<SummaryRow> rows;
  std::map<std::pair<std::string, std::size_t>, std::size_t> index;
  std::vector<std::array<std::vector<double>, 3>> scores;
  std::vector<RougeCounts> counts;
  for (const auto& r : runs) {
    auto [it, inserted] = index.try_emplace({r.variant, r.batch_size}, rows.size());
    if (inserted) {
      SummaryRow row;
      row.variant = r.variant;
      row.batch_size = r.batch_size;
      rows.push_back(row);
      scores.emplace_back();
      counts.emplace_back();
    }
    const std::size_t k = it->second;
    ++rows[k].runs;
    if (!r.ok) {
      ++rows[k].failures;
      continue;
    }
    scores[k][0].push_back(r.rouge.scores.r1);
    scores[k][1].push_back(r.rouge.scores.r2);
    scores[k][2].push_back(r.rouge.scores.rl);
    counts[k] += r.rouge.counts;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].macro_mean = {mean_of(scores[k][0]), mean_of(scores[k][1]), mean_of(scores[k][2])};
    rows[k].macro_stderr = {stderr_of(scores[k][0]), stderr_of(scores[k][1]), stderr_of(scores[k][2])};
    rows[k].micro = counts[k].scores();
  }
  return rows;
}

Json run_to_json(const RunRecord& run, const Vocab& vocab) {
  Json j{{"variant", run.variant},   {"batch_size", run.batch_size}, {"batch_index", run.batch_index},
         {"seed", run.seed},         {"ok", run.ok},                 {"error", run.error},
         {"labels", run.labels},     {"reference_ids", run.references}};
  Json refs = Json::array();
  for (const auto& r : run.references) refs.push_back(vocab.detokenize(r));
  j["reference_text"] = refs;
  if (!run.ok) return j;
  const auto& res = run.result;
  Json rec = Json::array();
  for (const auto& t : res.tokens) rec.push_back(vocab.detokenize(t));
  j["recovered_ids"] = res.tokens;
  j["recovered_text"] = rec;
  j["recovered_labels"] = res.labels;
  j["assignment"] = run.rouge.assignment;
  j["rouge"] = rouge_json(run.rouge.scores);
  j["rouge_counts"] = Json{{"overlap", run.rouge.counts.overlap},
                           {"reference", run.rouge.counts.reference},
                           {"candidate", run.rouge.counts.candidate}};
  j["final_l_rec"] = res.final_l_rec;
  j["final_l_lm"] = res.final_l_lm;
  j["accepted_proposals"] = res.accepted_proposals;
  j["truncated"] = res.truncated;
  Json snaps = Json::array();
  for (const auto& s : res.snapshots) {
    snaps.push_back(Json{{"phase", s.phase},
                         {"outer_iteration", s.outer_iteration},
                         {"continuous_step", s.continuous_step},
                         {"l_rec", s.l_rec},
                         {"l_lm", s.l_lm},
                         {"text", join_text(vocab, s.tokens)}});
  }
  j["snapshots"] = snaps;
  return j;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::size_t width = 7;
  for (const auto& r : rows) width = std::max(width, r.variant.size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width)) << "variant" << std::right << std::setw(4) << "B"
      << std::setw(6) << "runs" << std::setw(6) << "fail" << std::setw(15) << "R-1" << std::setw(15) << "R-2"
      << std::setw(15) << "R-L" << std::setw(8) << "mR-1" << std::setw(8) << "mR-2" << std::setw(8) << "mR-L"
      << "\n";
  auto cell = [](double m, double se) { return fixed(m, 1) + " +- " + fixed(se, 1); };
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.variant << std::right << std::setw(4)
        << r.batch_size << std::setw(6) << r.runs << std::setw(6) << r.failures << std::setw(15)
        << cell(r.macro_mean.r1, r.macro_stderr.r1) << std::setw(15) << cell(r.macro_mean.r2, r.macro_stderr.r2)
        << std::setw(15) << cell(r.macro_mean.rl, r.macro_stderr.rl) << std::setw(8) << fixed(r.micro.r1, 1)
        << std::setw(8) << fixed(r.micro.r2, 1) << std::setw(8) << fixed(r.micro.rl, 1) << "\n";
  }
  out << "R-columns: macro mean +- standard error over runs; mR-columns: micro average.\n";
  return out.str();
}

std::string trace_table(const std::vector<RunRecord>& runs, const Vocab& vocab) {
  // Group the first seed's runs of every (batch size, batch) across variants.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<const RunRecord*>> groups;
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> first_seed;
  for (const auto& r : runs) first_seed.try_emplace({r.batch_size, r.batch_index}, r.seed);
  for (const auto& r : runs) {
    const std::pair<std::size_t, std::size_t> key{r.batch_size, r.batch_index};
    if (r.seed == first_seed[key]) groups[key].push_back(&r);
  }
  std::ostringstream out;
  for (const auto& [key, group] : groups) {
    out << "== batch " << key.second << " (B=" << key.first << ", seed " << first_seed[key] << ") ==\n";
    out << "reference: " << join_text(vocab, group.front()->references) << "\n";
    std::map<std::size_t, std::vector<std::string>> table;
    std::vector<std::string> finals;
    for (std::size_t v = 0; v < group.size(); ++v) {
      const RunRecord& r = *group[v];
      if (!r.ok) {
        finals.push_back("(failed)");
        continue;
      }
      // Later snapshots at the same step (after the discrete phase) win.
      std::map<std::size_t, std::string> by_step;
      for (const auto& s : r.result.snapshots) {
        const bool periodic = s.phase == "init" ||
                              (r.result.snapshots.size() > 1 && s.phase == "continuous") ||
                              (s.phase == "outer" && by_step.count(s.continuous_step));
        if (periodic) by_step[s.continuous_step] = join_text(vocab, s.tokens);
      }
      for (const auto& [step, text] : by_step) {
        auto& row = table[step];
        row.resize(group.size());
        row[v] = text;
      }
      finals.push_back(join_text(vocab, r.result.tokens));
    }
    finals.resize(group.size());
    for (std::size_t v = 0; v < group.size(); ++v) {
      out << "  [" << group[v]->variant << "]\n";
      for (const auto& [step, row] : table) {
        if (!row[v].empty()) out << "    " << std::setw(6) << step << "  " << row[v] << "\n";
      }
      out << "    " << std::setw(6) << "final" << "  " << finals[v] << "\n";
    }
    out << "\n";
  }
  return out.str();
}

PreparedModels prepare_models(const ExperimentConfig& config) {
  PreparedModels out;
  out.corpus = load_corpus(config.corpus_path);
  for (const auto& w : out.corpus.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  out.split = stratified_split(out.corpus.sequences, config.num_test, config.num_hyper, config.split_seed);
  auto pick = [&](const std::vector<std::size_t>& idx) {
    std::vector<TokenSequence> seqs;
    for (std::size_t i : idx) seqs.push_back(out.corpus.sequences[i]);
    return seqs;
  };
  out.train = pick(out.split.train);
  out.hyper = pick(out.split.hyper);
  out.test = pick(out.split.test);
  std::vector<TokenSequence> lm_train;
  if (config.use_lm && config.lm_checkpoint.empty() && !config.lm_corpus_path.empty()) {
    Corpus text = load_corpus(config.lm_corpus_path, &out.corpus.vocab);
    for (const auto& w : text.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    lm_train = std::move(text.sequences);
  } else {
    std::vector<std::size_t> lm_idx = out.split.train;
    lm_idx.insert(lm_idx.end(), out.split.hyper.begin(), out.split.hyper.end());
    std::sort(lm_idx.begin(), lm_idx.end());
    lm_train = pick(lm_idx);
  }

  if (!config.victim_checkpoint.empty()) {
    ClassifierCheckpoint ckpt = load_classifier(config.victim_checkpoint);
    if (!(ckpt.vocab == out.corpus.vocab)) throw std::runtime_error("experiment: victim vocabulary differs from corpus");
    out.victim = std::move(ckpt.model);
  } else {
    ModelConfig mc = config.model;
    mc.vocab_size = out.corpus.vocab.size();
    out.victim = ClassifierModel::init(mc, config.classifier_training.seed);
    if (!out.train.empty()) train_classifier(out.victim, out.train, config.classifier_training);
  }
  if (!config.lm_checkpoint.empty()) {
    LmCheckpoint ckpt = load_lm(config.lm_checkpoint);
    if (!(ckpt.vocab == out.corpus.vocab)) throw std::runtime_error("experiment: LM vocabulary differs from corpus");
    out.lm = std::move(ckpt.lm);
  } else if (config.use_lm) {
    LmConfig lc = config.lm;
    lc.vocab_size = out.corpus.vocab.size();
    out.lm = TransformerLm::init(lc, config.lm_training.seed);
    if (!lm_train.empty()) train_lm(*out.lm, lm_train, config.lm_training);
  }
  if (!out.test.empty()) {
    std::vector<int> pred, truth;
    for (const auto& s : out.test) {
      pred.push_back(classifier_predict(out.victim, s));
      truth.push_back(s.label);
    }
    out.test_mcc = mcc(pred, truth);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const PreparedModels prepared = prepare_models(config);
  return run_experiment(config, prepared);
}

ExperimentReport run_experiment(const ExperimentConfig& config, const PreparedModels& prepared) {
  config.validate();
  ExperimentReport report;
  const Corpus& corpus = prepared.corpus;
  const ClassifierModel& victim = prepared.victim;
  const std::optional<TransformerLm>& lm = prepared.lm;
  report.vocab = corpus.vocab;
  report.classifier_test_mcc = prepared.test_mcc;
  const std::vector<TokenSequence>& pool = config.target_pool == "hyper" ? prepared.hyper : prepared.test;

  std::vector<TokenSequence> targets;
  for (const auto& s : pool) {
    if (s.ids.size() < config.min_length || s.ids.size() > config.max_length) continue;
    if (s.ids.size() + 1 > victim.config.max_positions) continue;
    targets.push_back(s);
    if (config.max_sequences && targets.size() == config.max_sequences) break;
  }

  struct Capture {
    std::size_t batch_size, batch_index;
    std::vector<TokenSequence> seqs;
    GradientSet gradients;
  };
  std::vector<Capture> captures;
  for (std::size_t bs : config.batch_sizes) {
    for (std::size_t k = 0; (k + 1) * bs <= targets.size(); ++k) {
      Capture c{bs, k, {targets.begin() + static_cast<std::ptrdiff_t>(k * bs),
                        targets.begin() + static_cast<std::ptrdiff_t>((k + 1) * bs)}, {}};
      c.gradients = client_gradient(victim, Batch::make(c.seqs));
      if (config.defense.sigma > 0) {
        c.gradients = apply_defense(c.gradients, {config.defense.sigma, mix_seed(config.defense.seed, bs, k)});
      }
      captures.push_back(std::move(c));
    }
  }

  const std::size_t per_capture = config.variants.size() * config.seeds.size();
  report.runs.resize(captures.size() * per_capture);
  run_parallel(report.runs.size(), worker_count(), [&](std::size_t job) {
    const Capture& cap = captures[job / per_capture];
    const AttackVariant& variant = config.variants[(job % per_capture) / config.seeds.size()];
    const std::uint64_t seed = config.seeds[job % config.seeds.size()];
    RunRecord& r = report.runs[job];
    r.variant = variant.name;
    r.batch_size = cap.batch_size;
    r.batch_index = cap.batch_index;
    r.seed = seed;
    AttackTarget target;
    for (const auto& s : cap.seqs) {
      r.references.push_back(strip_padding(s.ids));
      r.labels.push_back(s.label);
      target.lengths.push_back(s.ids.size());
    }
    target.labels = r.labels;
    const auto start = std::chrono::steady_clock::now();
    try {
      AttackConfig cfg = variant.config;
      cfg.seed = seed;
      r.result = run_attack(victim, cap.gradients, lm ? &*lm : nullptr, target, cfg);
      std::vector<std::vector<TokenId>> recovered;
      for (const auto& t : r.result.tokens) recovered.push_back(strip_padding(t));
      r.rouge = batch_rouge(r.references, recovered);
      r.ok = true;
    } catch (const std::exception& e) {
      r.ok = false;
      r.error = e.what();
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });
  report.summary = summarize(report.runs);

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    fs::create_directories(dir / "runs");
    // Manifest paths are relative to the experiment directory unless a
    // checkpoint was supplied from outside.
    const std::string victim_path = config.victim_checkpoint.empty() ? "victim.json" : config.victim_checkpoint;
    if (config.victim_checkpoint.empty()) save_classifier((dir / victim_path).string(), {corpus.vocab, victim});
    std::string lm_path = config.lm_checkpoint;
    if (lm && lm_path.empty()) {
      lm_path = "lm.json";
      save_lm((dir / lm_path).string(), {corpus.vocab, *lm});
    }
    fs::create_directories(dir / "captures");
    std::map<std::pair<std::size_t, std::size_t>, std::string> capture_paths;
    for (const auto& c : captures) {
      GradientCapture gc;
      gc.gradients = c.gradients;
      for (const auto& s : c.seqs) {
        gc.lengths.push_back(s.ids.size());
        gc.labels.push_back(s.label);
        gc.references.push_back(s.ids);
      }
      gc.defense = {config.defense.sigma, mix_seed(config.defense.seed, c.batch_size, c.batch_index)};
      std::ostringstream name;
      name << "b" << c.batch_size << "_" << std::setw(3) << std::setfill('0') << c.batch_index << ".json";
      save_gradients((dir / "captures" / name.str()).string(), gc);
      capture_paths[{c.batch_size, c.batch_index}] = "captures/" + name.str();
    }
    Json timing = Json::object();
    for (const auto& r : report.runs) {
      const fs::path vdir = dir / "runs" / r.variant;
      fs::create_directories(vdir);
      Json j = run_to_json(r, corpus.vocab);
      const AttackVariant& v = *std::find_if(config.variants.begin(), config.variants.end(),
                                             [&](const AttackVariant& a) { return a.name == r.variant; });
      AttackConfig cfg = v.config;
      cfg.seed = r.seed;
      j["manifest"] = Json{{"victim_checkpoint", victim_path},
                           {"lm_checkpoint", lm_path},
                           {"gradients", capture_paths[{r.batch_size, r.batch_index}]},
                           {"attack", attack_config_to_json(cfg)}};
      write_json((vdir / (run_file_stem(r) + ".json")).string(), j);
      timing[r.variant + "/" + run_file_stem(r)] = r.wall_seconds;
    }
    Json summary = Json::array();
    for (const auto& row : report.summary) {
      summary.push_back(Json{{"variant", row.variant},
                             {"batch_size", row.batch_size},
                             {"runs", row.runs},
                             {"failures", row.failures},
                             {"macro_mean", rouge_json(row.macro_mean)},
                             {"macro_stderr", rouge_json(row.macro_stderr)},
                             {"micro", rouge_json(row.micro)}});
    }
    write_json((dir / "summary.json").string(),
               Json{{"config", experiment_config_to_json(config)},
                    {"classifier_test_mcc", report.classifier_test_mcc},
                    {"rows", summary}});
    write_text((dir / "summary.txt").string(), summary_table(report.summary));
    write_text((dir / "traces.txt").string(), trace_table(report.runs, corpus.vocab));
    write_json((dir / "timing.json").string(), timing);
  }
  return report;
}

ReconstructionResult rerun_from_manifest(const Json& run_file, const std::string& root) {
  const Json& m = run_file.at("manifest");
  auto resolve = [&](const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path.string() : (fs::path(root) / path).string();
  };
  const ClassifierCheckpoint victim = load_classifier(resolve(m.at("victim_checkpoint").get<std::string>()));
  const GradientCapture capture = load_gradients(resolve(m.at("gradients").get<std::string>()));
  const AttackConfig cfg = attack_config_from_json(m.at("attack"));
  std::optional<LmCheckpoint> lm;
  const std::string lm_path = m.value("lm_checkpoint", std::string());
  if (!lm_path.empty()) lm = load_lm(resolve(lm_path));
  const AttackTarget target{capture.lengths, capture.labels};
  return run_attack(victim.model, capture.gradients, lm ? &lm->lm : nullptr, target, cfg);
}

std::vector<SummaryRow> summarize_directory(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(fs::path(dir) / "runs"))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> runs;
  for (const auto& f : files) {
    const Json j = read_json(f.string());
    RunRecord r;
    r.variant = j.at("variant").get<std::string>();
    r.batch_size = j.at("batch_size").get<std::size_t>();
    r.batch_index = j.at("batch_index").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ok = j.at("ok").get<bool>();
    if (r.ok) {
      const Json& s = j.at("rouge");
      r.rouge.scores = {s.at("r1").get<double>(), s.at("r2").get<double>(), s.at("rl").get<double>()};
      const Json& c = j.at("rouge_counts");
      r.rouge.counts.overlap = c.at("overlap").get<std::array<double, 3>>();
      r.rouge.counts.reference = c.at("reference").get<std::array<double, 3>>();
      r.rouge.counts.candidate = c.at("candidate").get<std::array<double, 3>>();
    }
    runs.push_back(std::move(r));
  }
  return summarize(runs);
}

}  // namespace gradleak
