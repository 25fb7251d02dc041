#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "gradleak/federated.hpp"
#include "gradleak/model.hpp"
#include "gradleak/vocab.hpp"

namespace gradleak {

using Json = nlohmann::json;

// Versioned JSON containers. Doubles are written in shortest round-trip form,
// so save followed by load reproduces every parameter bit for bit.
inline constexpr int kFormatVersion = 1;

Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);
Json tensor_map_to_json(const TensorMap& m);
TensorMap tensor_map_from_json(const Json& j);

Json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);
Json lm_config_to_json(const LmConfig& c);
LmConfig lm_config_from_json(const Json& j);

struct ClassifierCheckpoint {
  Vocab vocab;
  ClassifierModel model;
};

struct LmCheckpoint {
  Vocab vocab;
  TransformerLm lm;
};

// A captured client update plus what the attacker is assumed to know about it.
// `references` holds the private token ids for scoring; attacks never read it.
struct GradientCapture {
  GradientSet gradients;
  std::vector<std::size_t> lengths;
  std::vector<int> labels;
  std::vector<std::vector<TokenId>> references;
  DefenseConfig defense;
};

void save_classifier(const std::string& path, const ClassifierCheckpoint& ckpt);
// Throws if the file's parameter names or shapes disagree with its config.
ClassifierCheckpoint load_classifier(const std::string& path);

void save_lm(const std::string& path, const LmCheckpoint& ckpt);
LmCheckpoint load_lm(const std::string& path);

void save_gradients(const std::string& path, const GradientCapture& capture);
GradientCapture load_gradients(const std::string& path);

Json read_json(const std::string& path);
// Pretty-printed with a trailing newline.
void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace gradleak
