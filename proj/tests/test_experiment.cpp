#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gradleak/experiment.hpp"

using namespace gradleak;
namespace fs = std::filesystem;

namespace {

Json quick_variant(const std::string& name, const std::string& preset) {
  return Json{{"name", name}, {"preset", preset}, {"n_init", 3},         {"n_perm", 3},
              {"iterations", 2}, {"continuous_steps", 5}, {"discrete_steps", 5}};
}

ExperimentConfig quick_config(const fs::path& out) {
  Json j{{"corpus", std::string(GRADLEAK_SOURCE_DIR) + "/data/toy_corpus.tsv"},
         {"output_dir", out.string()},
         {"classifier_training", {{"epochs", 1}}},
         {"lm_training", {{"epochs", 1}}},
         {"lm", {{"dim", 8}, {"ff_dim", 16}, {"layers", 1}}},
         {"variants", {quick_variant("lamp-cos", "lamp-cos"), quick_variant("tag", "tag")}},
         {"max_sequences", 5},
         {"max_length", 6},
         {"seeds", {3}}};
  return experiment_config_from_json(j);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("experiment: bookkeeping, re-derivable summary and manifests") {
  const fs::path dir = fresh_dir("gradleak_test_experiment");
  const ExperimentReport report = run_experiment(quick_config(dir));
  REQUIRE(report.summary.size() == 2);
  for (const auto& row : report.summary) {
    CHECK(row.runs == 5);
    CHECK(row.failures == 0);
  }
  CHECK(report.runs.size() == 10);
  for (const char* f : {"summary.json", "summary.txt", "traces.txt", "timing.json", "victim.json", "lm.json"})
    CHECK(fs::exists(dir / f));

  // Summary means are the means of the per-run files.
  const std::vector<SummaryRow> rebuilt = summarize_directory(dir.string());
  REQUIRE(rebuilt.size() == 2);
  for (const auto& row : report.summary) {
    const auto it = std::find_if(rebuilt.begin(), rebuilt.end(),
                                 [&](const SummaryRow& r) { return r.variant == row.variant; });
    REQUIRE(it != rebuilt.end());
    CHECK(it->macro_mean.r1 == doctest::Approx(row.macro_mean.r1).epsilon(1e-12));
    CHECK(it->macro_mean.r2 == doctest::Approx(row.macro_mean.r2).epsilon(1e-12));
    CHECK(it->macro_mean.rl == doctest::Approx(row.macro_mean.rl).epsilon(1e-12));
    CHECK(it->micro.r2 == doctest::Approx(row.micro.r2).epsilon(1e-12));
  }

  // Every run is reproduced from its manifest.
  for (const auto& e : fs::recursive_directory_iterator(dir / "runs")) {
    if (!e.is_regular_file()) continue;
    const Json run = read_json(e.path().string());
    const ReconstructionResult r = rerun_from_manifest(run, dir.string());
    CHECK(Json(r.tokens) == run.at("recovered_ids"));
    CHECK(r.final_l_rec == run.at("final_l_rec").get<double>());
  }
}

TEST_CASE("experiment: rerun is byte-identical and independent of the worker count") {
  const fs::path dir = fresh_dir("gradleak_test_experiment_det");
  const fs::path first = fresh_dir("gradleak_test_experiment_det_first");
  const ExperimentConfig config = quick_config(dir);
  setenv("GRADLEAK_WORKERS", "1", 1);
  run_experiment(config);
  fs::rename(dir, first);
  setenv("GRADLEAK_WORKERS", "3", 1);
  run_experiment(config);
  unsetenv("GRADLEAK_WORKERS");

  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(first)) {
    if (!e.is_regular_file() || e.path().filename() == "timing.json") continue;
    const fs::path other = dir / fs::relative(e.path(), first);
    REQUIRE(fs::exists(other));
    CAPTURE(other.string());
    CHECK(slurp(e.path()) == slurp(other));
    ++compared;
  }
  CHECK(compared > 10);
}

TEST_CASE("experiment: the LM trains on the separate LM corpus when one is given") {
  ExperimentConfig c = quick_config("");
  c.classifier_training.epochs = 0;
  const PreparedModels pooled = prepare_models(c);
  c.lm_corpus_path = std::string(GRADLEAK_SOURCE_DIR) + "/data/lm_corpus.tsv";
  const PreparedModels separate = prepare_models(c);
  REQUIRE(pooled.lm.has_value());
  REQUIRE(separate.lm.has_value());
  CHECK(!(pooled.lm->params() == separate.lm->params()));
  // Same vocabulary either way.
  CHECK(separate.corpus.vocab == pooled.corpus.vocab);
  CHECK(separate.lm->vocab_size() == pooled.corpus.vocab.size());
}

TEST_CASE("experiment: config validation") {
  ExperimentConfig c = quick_config(fresh_dir("gradleak_test_experiment_bad"));
  c.variants.push_back(c.variants.front());
  CHECK_THROWS(c.validate());
  c = quick_config("");
  c.corpus_path = "/nonexistent.tsv";
  CHECK_THROWS(c.validate());
  c = quick_config("");
  c.target_pool = "train";
  CHECK_THROWS(c.validate());
  c = quick_config("");
  c.lm_corpus_path = "/nonexistent.tsv";
  CHECK_THROWS(c.validate());
  CHECK_THROWS(experiment_config_from_json(Json{{"corpus", "x"}, {"variants", {"no-such-preset"}}}));

  // Config JSON round trip.
  c = quick_config("out");
  const ExperimentConfig back = experiment_config_from_json(experiment_config_to_json(c));
  CHECK(experiment_config_to_json(back) == experiment_config_to_json(c));
}
