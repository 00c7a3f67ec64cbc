#include "stgnn/model.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

namespace stgnn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Nonlinearity kind) {
  switch (kind) {
    case Nonlinearity::Tanh:
      return "tanh";
    case Nonlinearity::ReLU:
      return "relu";
    case Nonlinearity::Identity:
      return "identity";
  }
  throw std::logic_error("to_string(Nonlinearity): unknown kind");
}

Nonlinearity nonlinearity_from_string(const std::string& name) {
  if (name == "tanh") return Nonlinearity::Tanh;
  if (name == "relu") return Nonlinearity::ReLU;
  if (name == "identity") return Nonlinearity::Identity;
  throw std::invalid_argument("unknown nonlinearity: " + name);
}

Modeld init_model(const ModelConfig& config, std::uint64_t seed, double spectral_radius) {
  config.validate();
  if (!(spectral_radius > 0.0))
    throw std::invalid_argument("init_model: spectral_radius must be positive");
  Rng rng(derive_seed(seed, seed_stream::model_init, 0));
  Modeld model;
  model.config = config;
  model.layers.resize(static_cast<std::size_t>(config.layers));
  Index in = config.input_features;
  for (LayerParams<double>& layer : model.layers) {
    layer.in_features = in;
    layer.out_features = config.features;
    layer.taps.resize(static_cast<std::size_t>(layer.in_features * layer.out_features));
    // a = 1 / sqrt((K+1) F_in) keeps the initial filter bank near unit norm.
    const double a = 1.0 / std::sqrt(static_cast<double>((config.order + 1) * in));
    for (Index f = 0; f < layer.out_features; ++f)
      for (Index g = 0; g < layer.in_features; ++g) {
        FilterTapsd& taps = layer.tap(f, g);
        taps.h.resize(static_cast<std::size_t>(config.order) + 1);
        double scale = a;
        for (Index k = 0; k <= config.order; ++k) {
          taps.h[static_cast<std::size_t>(k)] = rng.uniform(-scale, scale);
          scale /= spectral_radius;
        }
      }
    in = config.features;
  }
  const double b = 1.0 / std::sqrt(static_cast<double>(config.features));
  model.readout.weight.resize(config.readout_features, config.features);
  model.readout.bias.resize(config.readout_features);
  for (Index f = 0; f < config.readout_features; ++f)
    for (Index g = 0; g < config.features; ++g) model.readout.weight(f, g) = rng.uniform(-b, b);
  for (Index f = 0; f < config.readout_features; ++f) model.readout.bias[f] = rng.uniform(-b, b);
  return model;
}

namespace {

constexpr const char* kFormatTag = "stgnn-checkpoint-v1";

// Layer taps pack into the signal tensor layout as (F_out, F_in, K+1).
SpaceTimeSignald pack_layer(const LayerParams<double>& layer) {
  SpaceTimeSignald t(layer.out_features, layer.in_features, layer.order() + 1);
  for (Index f = 0; f < layer.out_features; ++f)
    for (Index g = 0; g < layer.in_features; ++g)
      for (Index k = 0; k <= layer.order(); ++k)
        t(f, g, k) = layer.tap(f, g).h[static_cast<std::size_t>(k)];
  return t;
}

LayerParams<double> unpack_layer(const SpaceTimeSignald& t) {
  LayerParams<double> layer;
  layer.out_features = t.nodes();
  layer.in_features = t.horizon();
  layer.taps.resize(static_cast<std::size_t>(layer.in_features * layer.out_features));
  for (Index f = 0; f < layer.out_features; ++f)
    for (Index g = 0; g < layer.in_features; ++g) {
      FilterTapsd& taps = layer.tap(f, g);
      taps.h.resize(static_cast<std::size_t>(t.features()));
      for (Index k = 0; k < t.features(); ++k) taps.h[static_cast<std::size_t>(k)] = t(f, g, k);
    }
  return layer;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir) {
  ckpt.model.config.validate();
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = kFormatTag;
  manifest["config"] = {{"layers", ckpt.model.config.layers},
                        {"features", ckpt.model.config.features},
                        {"order", ckpt.model.config.order},
                        {"nonlinearity", to_string(ckpt.model.config.nonlinearity)},
                        {"input_features", ckpt.model.config.input_features},
                        {"readout_features", ckpt.model.config.readout_features}};
  manifest["gso_kind"] = to_string(ckpt.gso_kind);
  json files = json::array();
  for (std::size_t l = 0; l < ckpt.model.layers.size(); ++l) {
    const std::string name = "layer" + std::to_string(l) + ".bin";
    save_signal(pack_layer(ckpt.model.layers[l]), (fs::path(dir) / name).string());
    files.push_back(name);
  }
  manifest["layer_files"] = files;
  {
    const auto& r = ckpt.model.readout;
    SpaceTimeSignald w(r.weight.rows(), r.weight.cols(), 1);
    for (Index i = 0; i < r.weight.rows(); ++i)
      for (Index j = 0; j < r.weight.cols(); ++j) w(i, j, 0) = r.weight(i, j);
    save_signal(w, (fs::path(dir) / "readout_weight.bin").string());
    SpaceTimeSignald b(r.bias.size(), 1, 1);
    for (Index i = 0; i < r.bias.size(); ++i) b(i, 0, 0) = r.bias[i];
    save_signal(b, (fs::path(dir) / "readout_bias.bin").string());
  }
  manifest["readout_weight_file"] = "readout_weight.bin";
  manifest["readout_bias_file"] = "readout_bias.bin";
  save_graph(ckpt.average_graph, (fs::path(dir) / "avg_graph.txt").string());
  manifest["average_graph_file"] = "avg_graph.txt";
  std::ofstream out((fs::path(dir) / "manifest.json").string(), std::ios::trunc);
  if (!out) throw std::runtime_error("save_checkpoint: cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("save_checkpoint: manifest write failed in " + dir);
}

Checkpoint load_checkpoint(const std::string& dir) {
  std::ifstream in((fs::path(dir) / "manifest.json").string());
  if (!in) throw std::runtime_error("load_checkpoint: cannot open manifest in " + dir);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_checkpoint: bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormatTag)
    throw std::runtime_error("load_checkpoint: unsupported format tag in " + dir);
  Checkpoint ckpt;
  const json& cfg = manifest.at("config");
  ckpt.model.config.layers = cfg.at("layers").get<Index>();
  ckpt.model.config.features = cfg.at("features").get<Index>();
  ckpt.model.config.order = cfg.at("order").get<Index>();
  ckpt.model.config.nonlinearity = nonlinearity_from_string(cfg.at("nonlinearity").get<std::string>());
  ckpt.model.config.input_features = cfg.at("input_features").get<Index>();
  ckpt.model.config.readout_features = cfg.at("readout_features").get<Index>();
  ckpt.model.config.validate();
  ckpt.gso_kind = gso_kind_from_string(manifest.at("gso_kind").get<std::string>());
  for (const auto& name : manifest.at("layer_files")) {
    const SpaceTimeSignald t =
        load_signal((fs::path(dir) / name.get<std::string>()).string());
    ckpt.model.layers.push_back(unpack_layer(t));
  }
  if (static_cast<Index>(ckpt.model.layers.size()) != ckpt.model.config.layers)
    throw std::runtime_error("load_checkpoint: layer count mismatch in " + dir);
  {
    const SpaceTimeSignald w =
        load_signal((fs::path(dir) / manifest.at("readout_weight_file").get<std::string>()).string());
    ckpt.model.readout.weight.resize(w.nodes(), w.horizon());
    for (Index i = 0; i < w.nodes(); ++i)
      for (Index j = 0; j < w.horizon(); ++j) ckpt.model.readout.weight(i, j) = w(i, j, 0);
    const SpaceTimeSignald b =
        load_signal((fs::path(dir) / manifest.at("readout_bias_file").get<std::string>()).string());
    ckpt.model.readout.bias.resize(b.nodes());
    for (Index i = 0; i < b.nodes(); ++i) ckpt.model.readout.bias[i] = b(i, 0, 0);
  }
  ckpt.average_graph =
      load_graph((fs::path(dir) / manifest.at("average_graph_file").get<std::string>()).string());
  return ckpt;
}

}  // namespace stgnn
