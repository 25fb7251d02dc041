#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gradleak/experiment.hpp"

using namespace gradleak;
namespace fs = std::filesystem;

namespace {

ExperimentConfig load_config(const std::string& path, const std::string& output_dir) {
  ExperimentConfig c = experiment_config_from_json(read_json(path));
  if (!output_dir.empty()) c.output_dir = output_dir;
  return c;
}

Json result_json(const ReconstructionResult& r, const Vocab& vocab) {
  Json text = Json::array();
  for (const auto& t : r.tokens) text.push_back(vocab.detokenize(t));
  return Json{{"recovered_ids", r.tokens},        {"recovered_text", text},
              {"recovered_labels", r.labels},     {"final_l_rec", r.final_l_rec},
              {"final_l_lm", r.final_l_lm},       {"accepted_proposals", r.accepted_proposals},
              {"truncated", r.truncated}};
}

int cmd_train(const std::string& config_path, const std::string& out) {
  ExperimentConfig c = load_config(config_path, out);
  if (c.output_dir.empty()) throw std::invalid_argument("train: an output directory is required");
  const PreparedModels p = prepare_models(c);
  fs::create_directories(c.output_dir);
  const fs::path dir(c.output_dir);
  save_classifier((dir / "victim.json").string(), {p.corpus.vocab, p.victim});
  if (p.lm) save_lm((dir / "lm.json").string(), {p.corpus.vocab, *p.lm});
  write_json((dir / "split.json").string(),
             Json{{"train", p.split.train}, {"hyper", p.split.hyper}, {"test", p.split.test}});
  std::printf("vocabulary %zu, train %zu, hyper %zu, test %zu\n", p.corpus.vocab.size(), p.train.size(),
              p.hyper.size(), p.test.size());
  std::printf("test MCC %.4f\n", p.test_mcc);
  return 0;
}

int cmd_capture(const std::string& victim_path, const std::string& input, const std::string& output, double sigma,
                std::uint64_t defense_seed) {
  const ClassifierCheckpoint victim = load_classifier(victim_path);
  const Corpus corpus = load_corpus(input, &victim.vocab);
  for (const auto& w : corpus.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  GradientCapture g;
  g.gradients = client_gradient(victim.model, Batch::make(corpus.sequences));
  g.defense = {sigma, defense_seed};
  if (sigma > 0) g.gradients = apply_defense(g.gradients, g.defense);
  for (const auto& s : corpus.sequences) {
    g.lengths.push_back(s.ids.size());
    g.labels.push_back(s.label);
    g.references.push_back(s.ids);
  }
  save_gradients(output, g);
  std::printf("captured B=%zu -> %s\n", corpus.sequences.size(), output.c_str());
  return 0;
}

int cmd_attack(const std::string& manifest, const std::string& root, const std::string& victim_path,
               const std::string& lm_path, const std::string& gradients, const std::string& attack,
               const std::vector<std::uint64_t>& seed, const std::string& output, bool enumerate_labels) {
  if (!manifest.empty()) {
    const Json run = read_json(manifest);
    const std::string base = root.empty() ? fs::path(manifest).parent_path().parent_path().parent_path().string()
                                          : root;
    const ReconstructionResult r = rerun_from_manifest(run, base);
    const fs::path vpath = fs::path(run.at("manifest").at("victim_checkpoint").get<std::string>());
    const Vocab vocab = load_classifier(vpath.is_absolute() ? vpath.string() : (fs::path(base) / vpath).string()).vocab;
    Json out = result_json(r, vocab);
    const bool same = run.value("ok", false) && run.at("recovered_ids") == out.at("recovered_ids") &&
                      run.at("final_l_rec").get<double>() == r.final_l_rec;
    out["matches_run_file"] = same;
    if (!output.empty()) write_json(output, out);
    std::printf("%s\nmatches run file: %s\n", out.at("recovered_text").dump().c_str(), same ? "yes" : "no");
    return same ? 0 : 1;
  }
  if (victim_path.empty() || gradients.empty()) {
    throw std::invalid_argument("attack: give --manifest, or --victim and --gradients");
  }
  const ClassifierCheckpoint victim = load_classifier(victim_path);
  const GradientCapture capture = load_gradients(gradients);
  AttackConfig cfg = attack.empty() ? attack_preset("lamp-cos")
                     : fs::exists(attack) ? attack_config_from_json(read_json(attack))
                                          : attack_preset(attack);
  if (!seed.empty()) cfg.seed = seed.front();
  if (enumerate_labels) cfg.label_mode = LabelMode::Enumerate;
  std::optional<LmCheckpoint> lm;
  if (!lm_path.empty()) lm = load_lm(lm_path);
  const AttackTarget target{capture.lengths, cfg.label_mode == LabelMode::Known ? capture.labels : std::vector<int>{}};
  const ReconstructionResult r = run_attack(victim.model, capture.gradients, lm ? &lm->lm : nullptr, target, cfg);
  Json out = result_json(r, victim.vocab);
  if (!capture.references.empty()) {
    std::vector<std::vector<TokenId>> refs, rec;
    for (const auto& t : capture.references) refs.push_back(strip_padding(t));
    for (const auto& t : r.tokens) rec.push_back(strip_padding(t));
    const BatchRouge br = batch_rouge(refs, rec);
    out["rouge"] = Json{{"r1", br.scores.r1}, {"r2", br.scores.r2}, {"rl", br.scores.rl}};
  }
  out["attack"] = attack_config_to_json(cfg);
  if (!output.empty()) write_json(output, out);
  std::cout << out.dump(1) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& run_dir, const std::string& reference, const std::string& candidate) {
  if (!reference.empty() || !candidate.empty()) {
    const std::vector<std::string> texts{reference, candidate};
    const Vocab v = Vocab::build(texts);
    const RougeScores s = rouge(v.tokenize(reference), v.tokenize(candidate));
    std::printf("R-1 %.2f  R-2 %.2f  R-L %.2f\n", s.r1, s.r2, s.rl);
    return 0;
  }
  if (run_dir.empty()) throw std::invalid_argument("evaluate: give --run-dir or --reference/--candidate");
  const std::vector<SummaryRow> rows = summarize_directory(run_dir);
  std::cout << summary_table(rows);
  const fs::path summary = fs::path(run_dir) / "summary.json";
  if (!fs::exists(summary)) return 0;
  // Cross-check against the stored summary.
  const Json stored_file = read_json(summary.string());
  std::map<std::pair<std::string, std::size_t>, Json> stored;
  for (const auto& r : stored_file.at("rows"))
    stored[{r.at("variant").get<std::string>(), r.at("batch_size").get<std::size_t>()}] = r;
  bool ok = true;
  for (const auto& row : rows) {
    auto it = stored.find({row.variant, row.batch_size});
    if (it == stored.end()) {
      ok = false;
      continue;
    }
    const Json& m = it->second.at("macro_mean");
    for (auto [key, value] : {std::pair{"r1", row.macro_mean.r1}, {"r2", row.macro_mean.r2}, {"rl", row.macro_mean.rl}})
      if (std::abs(m.at(key).get<double>() - value) > 1e-9) ok = false;
  }
  std::printf("stored summary %s\n", ok ? "matches run files" : "DIFFERS from run files");
  return ok ? 0 : 1;
}

int cmd_experiment(const std::string& config_path, const std::string& out) {
  const ExperimentConfig c = load_config(config_path, out);
  const ExperimentReport report = run_experiment(c);
  std::printf("test MCC %.4f\n%s", report.classifier_test_mcc, summary_table(report.summary).c_str());
  std::size_t failures = 0;
  for (const auto& r : report.runs) {
    if (r.ok) continue;
    ++failures;
    std::fprintf(stderr, "run %s b%zu_%zu s%llu failed: %s\n", r.variant.c_str(), r.batch_size, r.batch_index,
                 static_cast<unsigned long long>(r.seed), r.error.c_str());
  }
  return failures ? 1 : 0;
}

// Grid file: {"base": <attack config or preset>, "grid": {"alpha_lm": [...], ...}}
int cmd_grid_search(const std::string& config_path, const std::string& grid_path, const std::string& out) {
  ExperimentConfig c = load_config(config_path, "");
  c.output_dir.clear();
  c.target_pool = "hyper";
  const Json grid = read_json(grid_path);
  const Json base = attack_config_to_json(attack_config_from_json(grid.value("base", Json("lamp-cos"))));
  std::vector<std::pair<std::string, Json>> axes;
  for (const auto& [key, values] : grid.at("grid").items()) axes.emplace_back(key, values);

  std::vector<Json> combos{Json::object()};
  for (const auto& [key, values] : axes) {
    std::vector<Json> next;
    for (const auto& combo : combos)
      for (const auto& v : values) {
        Json j = combo;
        j[key] = v;
        next.push_back(j);
      }
    combos = std::move(next);
  }
  c.variants.clear();
  for (std::size_t k = 0; k < combos.size(); ++k) {
    Json j = base;
    j.merge_patch(combos[k]);
    c.variants.push_back({"grid" + std::to_string(k), attack_config_from_json(j)});
  }
  c.validate();
  const PreparedModels prepared = prepare_models(c);
  const ExperimentReport report = run_experiment(c, prepared);

  Json rows = Json::array();
  std::size_t best = 0;
  for (std::size_t k = 0; k < report.summary.size(); ++k) {
    const SummaryRow& r = report.summary[k];
    if (r.macro_mean.r2 > report.summary[best].macro_mean.r2) best = k;
    const std::size_t idx = std::stoul(r.variant.substr(4));
    rows.push_back(Json{{"overrides", combos[idx]},
                        {"r1", r.macro_mean.r1},
                        {"r2", r.macro_mean.r2},
                        {"rl", r.macro_mean.rl},
                        {"failures", r.failures}});
    std::printf("%-50s R-1 %6.2f  R-2 %6.2f  R-L %6.2f\n", combos[idx].dump().c_str(), r.macro_mean.r1,
                r.macro_mean.r2, r.macro_mean.rl);
  }
  if (!rows.empty()) std::printf("best by R-2: %s\n", rows[best].at("overrides").dump().c_str());
  if (!out.empty()) write_json(out, Json{{"rows", rows}, {"best", rows.empty() ? Json() : rows[best]}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient leakage attacks on transformer text classifiers"};
  app.require_subcommand(1);

  std::string config, out, victim, lm, gradients, attack, input, manifest, root, run_dir, reference, candidate,
      grid;
  double sigma = 0.0;
  std::uint64_t defense_seed = 0;
  std::vector<std::uint64_t> seed;
  bool enumerate_labels = false;

  auto* train = app.add_subcommand("train", "Train the victim classifier and the auxiliary LM");
  train->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("-o,--output-dir", out, "Directory for victim.json, lm.json and split.json");

  auto* capture = app.add_subcommand("capture-gradients", "Compute a client gradient for a TSV batch");
  capture->add_option("--victim", victim, "Victim checkpoint")->required()->check(CLI::ExistingFile);
  capture->add_option("--input", input, "label<TAB>text lines forming one batch")->required()->check(CLI::ExistingFile);
  capture->add_option("-o,--output", out, "Gradient file to write")->required();
  capture->add_option("--sigma", sigma, "Gaussian noise std added to the gradient")->check(CLI::NonNegativeNumber);
  capture->add_option("--defense-seed", defense_seed, "Seed of the noise");

  auto* att = app.add_subcommand("attack", "Reconstruct text from a captured gradient");
  att->add_option("--manifest", manifest, "Run file of an experiment to re-run and compare")->check(CLI::ExistingFile);
  att->add_option("--root", root, "Experiment directory for relative manifest paths");
  att->add_option("--victim", victim, "Victim checkpoint")->check(CLI::ExistingFile);
  att->add_option("--lm", lm, "LM checkpoint")->check(CLI::ExistingFile);
  att->add_option("--gradients", gradients, "Gradient file")->check(CLI::ExistingFile);
  att->add_option("--attack", attack, "Preset name or attack config file");
  att->add_option("--seed", seed, "Attack seed")->expected(1);
  att->add_flag("--enumerate-labels", enumerate_labels, "Search over label assignments");
  att->add_option("-o,--output", out, "Result file");

  auto* eval = app.add_subcommand("evaluate", "Score texts or re-derive an experiment summary");
  eval->add_option("--run-dir", run_dir, "Experiment output directory")->check(CLI::ExistingDirectory);
  eval->add_option("--reference", reference, "Reference text");
  eval->add_option("--candidate", candidate, "Candidate text");

  auto* exp = app.add_subcommand("experiment", "Run every variant on the test pool and write reports");
  exp->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  exp->add_option("-o,--output-dir", out, "Overrides output_dir");

  auto* gs = app.add_subcommand("grid-search", "Score attack hyperparameters on the held-out tuning pool");
  gs->add_option("-c,--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  gs->add_option("--grid", grid, "Grid file")->required()->check(CLI::ExistingFile);
  gs->add_option("-o,--output", out, "Result file");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(config, out);
    if (*capture) return cmd_capture(victim, input, out, sigma, defense_seed);
    if (*att) return cmd_attack(manifest, root, victim, lm, gradients, attack, seed, out, enumerate_labels);
    if (*eval) return cmd_evaluate(run_dir, reference, candidate);
    if (*exp) return cmd_experiment(config, out);
    if (*gs) return cmd_grid_search(config, grid, out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
