#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gradleak/attack.hpp"
#include "gradleak/corpus.hpp"
#include "gradleak/io.hpp"
#include "gradleak/metrics.hpp"
#include "gradleak/train.hpp"

namespace gradleak {

struct AttackVariant {
  std::string name;
  AttackConfig config;
};

// Preset by name, then any AttackConfig fields present in `overrides`.
AttackConfig attack_config_from_json(const Json& j);
Json attack_config_to_json(const AttackConfig& c);

struct ExperimentConfig {
  std::string corpus_path;
  std::string output_dir;  // empty: nothing is written
  ModelConfig model;        // vocab_size is filled in from the corpus
  LmConfig lm;
  TrainConfig classifier_training{.epochs = 10};
  TrainConfig lm_training{.epochs = 8};
  std::string victim_checkpoint;  // load instead of training when set
  std::string lm_checkpoint;
  // Unlabelled text for the LM; empty: the train and hyper pools.
  std::string lm_corpus_path;
  bool use_lm = true;
  std::vector<AttackVariant> variants;
  DefenseConfig defense;
  std::vector<std::size_t> batch_sizes{1};
  std::size_t num_test = 100;
  std::size_t num_hyper = 10;
  std::uint64_t split_seed = 0;
  // Test sequences outside [min_length, max_length] are skipped; at most
  // max_sequences of the rest are attacked (0 = all).
  std::size_t min_length = 1;
  std::size_t max_length = 1000;
  std::size_t max_sequences = 0;
  std::vector<std::uint64_t> seeds{0};
  // "test" for evaluation; "hyper" attacks the held-out tuning sequences.
  std::string target_pool = "test";

  void validate() const;
};

ExperimentConfig experiment_config_from_json(const Json& j);
Json experiment_config_to_json(const ExperimentConfig& c);

struct RunRecord {
  std::string variant;
  std::size_t batch_size = 1;
  std::size_t batch_index = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<TokenId>> references;
  std::vector<int> labels;
  bool ok = false;
  std::string error;
  ReconstructionResult result;
  BatchRouge rouge;
  double wall_seconds = 0.0;
};

struct SummaryRow {
  std::string variant;
  std::size_t batch_size = 1;
  std::size_t runs = 0;
  std::size_t failures = 0;
  RougeScores macro_mean;
  RougeScores macro_stderr;
  RougeScores micro;
};

struct ExperimentReport {
  Vocab vocab;
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
  double classifier_test_mcc = 0.0;
};

// Corpus, split and the trained (or loaded) victim and LM. The victim sees the
// train pool only; the LM sees lm_corpus_path, or train and hyper without one.
struct PreparedModels {
  Corpus corpus;
  CorpusSplit split;
  std::vector<TokenSequence> train, hyper, test;
  ClassifierModel victim;
  std::optional<TransformerLm> lm;
  double test_mcc = 0.0;
};

PreparedModels prepare_models(const ExperimentConfig& config);

// Trains or loads the victim and LM, captures (optionally defended) client
// gradients for every test batch, runs every variant and seed, and scores the
// reconstructions. Runs go to a pool of GRADLEAK_WORKERS threads (default:
// hardware concurrency); results do not depend on the pool size. Files are
// written when output_dir is set: runs/<variant>/b<B>_<batch>_s<seed>.json,
// summary.json, summary.txt, traces.txt and timing.json.
ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config, const PreparedModels& prepared);

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs);
Json run_to_json(const RunRecord& run, const Vocab& vocab);
std::string summary_table(const std::vector<SummaryRow>& rows);
// Snapshot text per continuous step, one column block per variant.
std::string trace_table(const std::vector<RunRecord>& runs, const Vocab& vocab);

// Re-runs one attack from the "manifest" block of a run file. Relative paths
// resolve against `root`, the experiment directory.
ReconstructionResult rerun_from_manifest(const Json& run_file, const std::string& root);

// Summary rebuilt from the run files under <dir>/runs.
std::vector<SummaryRow> summarize_directory(const std::string& dir);

std::size_t worker_count();

// Mean and standard error of the mean (0 for fewer than two values).
double mean_of(const std::vector<double>& v);
double stderr_of(const std::vector<double>& v);

}  // namespace gradleak
