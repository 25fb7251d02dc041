#include "gradleak/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gradleak {
namespace {

void check_header(const Json& j, const std::string& kind, const std::string& path) {
  if (!j.is_object() || j.value("format", "") != "gradleak" || j.value("kind", "") != kind) {
    throw std::runtime_error(path + ": not a gradleak " + kind + " file");
  }
  const int version = j.value("version", 0);
  if (version != kFormatVersion) {
    throw std::runtime_error(path + ": unsupported format version " + std::to_string(version));
  }
}

Json header(const std::string& kind) { return Json{{"format", "gradleak"}, {"kind", kind}, {"version", kFormatVersion}}; }

void check_layout(const TensorMap& expected, const TensorMap& got, const std::string& path) {
  if (expected.size() != got.size()) throw std::runtime_error(path + ": parameter count differs from config");
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& [en, et] = expected.entries()[i];
    const auto& [gn, gt] = got.entries()[i];
    if (en != gn) throw std::runtime_error(path + ": expected parameter '" + en + "', found '" + gn + "'");
    if (et.rows() != gt.rows() || et.cols() != gt.cols()) {
      throw std::runtime_error(path + ": parameter '" + en + "' has shape " + gt.shape_str() + ", config implies " +
                               et.shape_str());
    }
  }
  if (!got.all_finite()) throw std::runtime_error(path + ": non-finite parameter values");
}

}  // namespace

Json tensor_to_json(const Tensor& t) {
  return Json{{"shape", {t.rows(), t.cols()}}, {"values", t.data()}};
}

Tensor tensor_from_json(const Json& j) {
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2) throw std::runtime_error("tensor: shape must have two entries");
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != shape[0] * shape[1]) throw std::runtime_error("tensor: value count does not match shape");
  return Tensor(shape[0], shape[1], std::move(values));
}

Json tensor_map_to_json(const TensorMap& m) {
  Json out = Json::array();
  for (const auto& [name, t] : m) {
    Json e = tensor_to_json(t);
    e["name"] = name;
    out.push_back(std::move(e));
  }
  return out;
}

TensorMap tensor_map_from_json(const Json& j) {
  TensorMap m;
  for (const auto& e : j) {
    const auto name = e.at("name").get<std::string>();
    if (m.contains(name)) throw std::runtime_error("duplicate tensor '" + name + "'");
    m.set(name, tensor_from_json(e));
  }
  return m;
}

Json model_config_to_json(const ModelConfig& c) {
  return Json{{"vocab_size", c.vocab_size}, {"dim", c.dim},
              {"heads", c.heads},           {"ff_dim", c.ff_dim},
              {"layers", c.layers},         {"max_positions", c.max_positions},
              {"num_classes", c.num_classes}, {"token_init_std", c.token_init_std},
              {"position_init_std", c.position_init_std}};
}

ModelConfig model_config_from_json(const Json& j) {
  ModelConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.dim = j.value("dim", c.dim);
  c.heads = j.value("heads", c.heads);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.layers = j.value("layers", c.layers);
  c.max_positions = j.value("max_positions", c.max_positions);
  c.num_classes = j.value("num_classes", c.num_classes);
  c.token_init_std = j.value("token_init_std", c.token_init_std);
  c.position_init_std = j.value("position_init_std", c.position_init_std);
  return c;
}

Json lm_config_to_json(const LmConfig& c) {
  return Json{{"vocab_size", c.vocab_size}, {"dim", c.dim},       {"heads", c.heads},
              {"ff_dim", c.ff_dim},         {"layers", c.layers}, {"context", c.context}};
}

LmConfig lm_config_from_json(const Json& j) {
  LmConfig c;
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.dim = j.value("dim", c.dim);
  c.heads = j.value("heads", c.heads);
  c.ff_dim = j.value("ff_dim", c.ff_dim);
  c.layers = j.value("layers", c.layers);
  c.context = j.value("context", c.context);
  return c;
}

void save_classifier(const std::string& path, const ClassifierCheckpoint& ckpt) {
  Json j = header("classifier");
  j["vocab"] = ckpt.vocab.tokens();
  j["config"] = model_config_to_json(ckpt.model.config);
  j["params"] = tensor_map_to_json(ckpt.model.params);
  write_json(path, j);
}

ClassifierCheckpoint load_classifier(const std::string& path) {
  const Json j = read_json(path);
  check_header(j, "classifier", path);
  ClassifierCheckpoint ckpt;
  ckpt.vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
  ckpt.model.config = model_config_from_json(j.at("config"));
  if (ckpt.model.config.vocab_size != ckpt.vocab.size()) {
    throw std::runtime_error(path + ": vocabulary size differs from config");
  }
  ckpt.model.params = tensor_map_from_json(j.at("params"));
  check_layout(ClassifierModel::init(ckpt.model.config, 0).params, ckpt.model.params, path);
  return ckpt;
}

void save_lm(const std::string& path, const LmCheckpoint& ckpt) {
  Json j = header("language-model");
  j["vocab"] = ckpt.vocab.tokens();
  j["config"] = lm_config_to_json(ckpt.lm.config());
  j["params"] = tensor_map_to_json(ckpt.lm.params());
  write_json(path, j);
}

LmCheckpoint load_lm(const std::string& path) {
  const Json j = read_json(path);
  check_header(j, "language-model", path);
  LmCheckpoint ckpt;
  ckpt.vocab = Vocab::from_tokens(j.at("vocab").get<std::vector<std::string>>());
  const LmConfig config = lm_config_from_json(j.at("config"));
  if (config.vocab_size != ckpt.vocab.size()) throw std::runtime_error(path + ": vocabulary size differs from config");
  TensorMap params = tensor_map_from_json(j.at("params"));
  check_layout(TransformerLm::init(config, 0).params(), params, path);
  ckpt.lm = TransformerLm(config, std::move(params));
  return ckpt;
}

void save_gradients(const std::string& path, const GradientCapture& capture) {
  Json j = header("gradients");
  j["lengths"] = capture.lengths;
  j["labels"] = capture.labels;
  j["references"] = capture.references;
  j["defense"] = Json{{"sigma", capture.defense.sigma}, {"seed", capture.defense.seed}};
  j["gradients"] = tensor_map_to_json(capture.gradients);
  write_json(path, j);
}

GradientCapture load_gradients(const std::string& path) {
  const Json j = read_json(path);
  check_header(j, "gradients", path);
  GradientCapture c;
  c.lengths = j.at("lengths").get<std::vector<std::size_t>>();
  c.labels = j.at("labels").get<std::vector<int>>();
  c.references = j.value("references", std::vector<std::vector<TokenId>>{});
  c.defense.sigma = j.at("defense").value("sigma", 0.0);
  c.defense.seed = j.at("defense").value("seed", std::uint64_t{0});
  c.gradients = tensor_map_from_json(j.at("gradients"));
  if (c.lengths.size() != c.labels.size()) throw std::runtime_error(path + ": lengths and labels differ in size");
  if (!c.gradients.all_finite()) throw std::runtime_error(path + ": non-finite gradient values");
  return c;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(1) + "\n"); }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace gradleak
