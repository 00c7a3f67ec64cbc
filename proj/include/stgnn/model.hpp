// Space-time graph neural network: stacked filter-bank layers with pointwise
// nonlinearities and a node-local affine readout.
//
// Layer l maps F_in feature slices to F_out slices,
//
//   X_l^f = sigma( sum_g sum_k h_k^{fg} S^k X_{l-1}^g C^k ),
//
// and the generalized form replaces S^k by the chained product S_k ... S_1 of
// a per-hop GSO sequence shared by every layer of one forward pass. The
// readout applies one weight matrix and bias to the feature vector of every
// (node, time) pair.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stgnn/filter.hpp"
#include "stgnn/rng.hpp"
#include "stgnn/shift.hpp"
#include "stgnn/signal.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

// Identity is a test and baseline hook: it turns a one-layer network into a
// plain linear filter bank.
enum class Nonlinearity { Tanh, ReLU, Identity };

std::string to_string(Nonlinearity kind);
Nonlinearity nonlinearity_from_string(const std::string& name);

template <typename Scalar>
Scalar nonlinearity_scalar(Scalar z, Nonlinearity kind) {
  switch (kind) {
    case Nonlinearity::Tanh:
      return std::tanh(z);
    case Nonlinearity::ReLU:
      return z > Scalar(0) ? z : Scalar(0);
    case Nonlinearity::Identity:
      return z;
  }
  throw std::logic_error("nonlinearity_scalar: unknown kind");
}

// sigma'(z) expressed through the activation value where convenient.
template <typename Scalar>
Scalar nonlinearity_derivative_scalar(Scalar z, Nonlinearity kind) {
  switch (kind) {
    case Nonlinearity::Tanh: {
      const Scalar t = std::tanh(z);
      return Scalar(1) - t * t;
    }
    case Nonlinearity::ReLU:
      return z > Scalar(0) ? Scalar(1) : Scalar(0);
    case Nonlinearity::Identity:
      return Scalar(1);
  }
  throw std::logic_error("nonlinearity_derivative_scalar: unknown kind");
}

template <typename Scalar>
SpaceTimeSignal<Scalar> nonlinearity_apply(const SpaceTimeSignal<Scalar>& z, Nonlinearity kind) {
  SpaceTimeSignal<Scalar> out = z;
  for (Index f = 0; f < out.features(); ++f)
    out.slice(f) = out.slice(f).unaryExpr(
        [kind](Scalar v) { return nonlinearity_scalar(v, kind); });
  return out;
}

// One bank of F_out x F_in filters, all of the same order.
template <typename Scalar>
struct LayerParams {
  Index in_features = 0;
  Index out_features = 0;
  std::vector<FilterTaps<Scalar>> taps;  // row-major [f_out][f_in]

  FilterTaps<Scalar>& tap(Index f_out, Index f_in) {
    return taps[static_cast<std::size_t>(f_out * in_features + f_in)];
  }
  const FilterTaps<Scalar>& tap(Index f_out, Index f_in) const {
    return taps[static_cast<std::size_t>(f_out * in_features + f_in)];
  }
  Index order() const { return taps.empty() ? -1 : taps.front().order(); }
};

template <typename Scalar>
struct ReadoutParams {
  DenseMatrix<Scalar> weight;  // readout_features x features
  DenseVector<Scalar> bias;    // readout_features
};

struct ModelConfig {
  Index layers = 1;            // L
  Index features = 64;         // F per hidden layer
  Index order = 3;             // K
  Nonlinearity nonlinearity = Nonlinearity::Tanh;
  Index input_features = 4;    // F_in of the first layer
  Index readout_features = 2;  // rows of the readout

  void validate() const {
    if (layers < 1 || features < 1 || order < 0 || input_features < 1 || readout_features < 1)
      throw std::invalid_argument("ModelConfig: L >= 1, F >= 1, K >= 0 required");
  }
};

template <typename Scalar>
struct Model {
  ModelConfig config;
  std::vector<LayerParams<Scalar>> layers;
  ReadoutParams<Scalar> readout;
};

using Modeld = Model<double>;

// Uniform initialization in [-a, a] with a = 1 / sqrt((K+1) F_in) per filter
// bank, the readout likewise with a = 1 / sqrt(F). spectral_radius rescales
// tap k by rho^{-k} so that diffusions of a GSO with spectral radius rho
// enter the nonlinearity at comparable magnitude; 1.0 leaves taps as drawn.
Modeld init_model(const ModelConfig& config, std::uint64_t seed, double spectral_radius = 1.0);

// Pre-nonlinearity layer output: slice f = sum_g sum_k h_k^{fg} z_k^g where
// z_k^g are the per-input-feature diffusions (computed once, shared over f).
template <typename Scalar>
SpaceTimeSignal<Scalar> layer_preactivation(const SpaceTimeSignal<Scalar>& x,
                                            const LayerParams<Scalar>& params,
                                            const GsoSequenceFn<Scalar>& gso_at,
                                            const TimeShiftOperator& tso) {
  if (x.features() != params.in_features)
    throw std::invalid_argument("layer_preactivation: input feature count mismatch");
  if (params.out_features < 1 || params.taps.empty())
    throw std::invalid_argument("layer_preactivation: empty layer");
  const Index order = params.order();
  // Diffusions per input feature: z[g][k] is an N x T matrix.
  std::vector<std::vector<DenseMatrix<Scalar>>> z(static_cast<std::size_t>(x.features()));
  for (Index g = 0; g < x.features(); ++g) {
    auto& zg = z[static_cast<std::size_t>(g)];
    zg.reserve(static_cast<std::size_t>(order) + 1);
    zg.push_back(x.slice(g));
    for (Index k = 1; k <= order; ++k) {
      DenseMatrix<Scalar> next = gso_at(k) * zg.back();
      detail::delay_once(next, tso.mode);
      zg.push_back(std::move(next));
    }
  }
  SpaceTimeSignal<Scalar> pre(x.nodes(), x.horizon(), params.out_features);
  for (Index f = 0; f < params.out_features; ++f) {
    DenseMatrix<Scalar>& acc = pre.slice(f);
    for (Index g = 0; g < params.in_features; ++g) {
      const auto& h = params.tap(f, g).h;
      const auto& zg = z[static_cast<std::size_t>(g)];
      for (Index k = 0; k <= order; ++k) acc += h[static_cast<std::size_t>(k)] * zg[static_cast<std::size_t>(k)];
    }
  }
  return pre;
}

template <typename Scalar>
SpaceTimeSignal<Scalar> layer_forward(const SpaceTimeSignal<Scalar>& x,
                                      const LayerParams<Scalar>& params,
                                      const GsoSequenceFn<Scalar>& gso_at,
                                      const TimeShiftOperator& tso, Nonlinearity kind) {
  return nonlinearity_apply(layer_preactivation(x, params, gso_at, tso), kind);
}

// Node-local affine map of the feature vector at every (node, time).
template <typename Scalar>
SpaceTimeSignal<Scalar> apply_readout(const SpaceTimeSignal<Scalar>& x,
                                      const ReadoutParams<Scalar>& readout) {
  if (readout.weight.cols() != x.features())
    throw std::invalid_argument("apply_readout: feature count mismatch");
  if (readout.bias.size() != readout.weight.rows())
    throw std::invalid_argument("apply_readout: bias length mismatch");
  SpaceTimeSignal<Scalar> y(x.nodes(), x.horizon(), readout.weight.rows());
  for (Index f = 0; f < readout.weight.rows(); ++f) {
    DenseMatrix<Scalar>& out = y.slice(f);
    out.setConstant(readout.bias[f]);
    for (Index g = 0; g < x.features(); ++g) out += readout.weight(f, g) * x.slice(g);
  }
  return y;
}

template <typename Scalar>
SpaceTimeSignal<Scalar> model_forward_with(const SpaceTimeSignal<Scalar>& x,
                                           const Model<Scalar>& model,
                                           const GsoSequenceFn<Scalar>& gso_at,
                                           const TimeShiftOperator& tso) {
  if (x.features() != model.config.input_features)
    throw std::invalid_argument("model_forward: input feature count mismatch");
  SpaceTimeSignal<Scalar> h = x;
  for (const LayerParams<Scalar>& layer : model.layers)
    h = layer_forward(h, layer, gso_at, tso, model.config.nonlinearity);
  return apply_readout(h, model.readout);
}

template <typename Scalar>
SpaceTimeSignal<Scalar> model_forward(const SpaceTimeSignal<Scalar>& x, const Model<Scalar>& model,
                                      const DenseMatrix<Scalar>& gso,
                                      const TimeShiftOperator& tso) {
  GsoSequenceFn<Scalar> gso_at = [&gso](Index) -> const DenseMatrix<Scalar>& { return gso; };
  return model_forward_with(x, model, gso_at, tso);
}

// One GSO per hop, shared by all layers of the pass; gsos[k-1] is S_k.
template <typename Scalar>
SpaceTimeSignal<Scalar> generalized_model_forward(const SpaceTimeSignal<Scalar>& x,
                                                  const Model<Scalar>& model,
                                                  const std::vector<DenseMatrix<Scalar>>& gsos,
                                                  const TimeShiftOperator& tso) {
  if (static_cast<Index>(gsos.size()) != model.config.order)
    throw std::invalid_argument("generalized_model_forward: sequence length must equal order");
  GsoSequenceFn<Scalar> gso_at = [&gsos](Index k) -> const DenseMatrix<Scalar>& {
    return gsos[static_cast<std::size_t>(k - 1)];
  };
  return model_forward_with(x, model, gso_at, tso);
}

inline SpaceTimeSignald model_forward(const SpaceTimeSignald& x, const Modeld& model,
                                      const ShiftOperator& s, const TimeShiftOperator& tso) {
  return model_forward(x, model, s.matrix, tso);
}

// Checkpoint directory layout: a JSON manifest ("stgnn-checkpoint-v1") with
// the model configuration plus per-block binary tensors in the space-time
// signal layout, and the averaged training graph in the text graph format.
struct Checkpoint {
  Modeld model;
  Graph average_graph;  // averaged training communication graph
  GsoKind gso_kind = GsoKind::Adjacency;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& dir);
Checkpoint load_checkpoint(const std::string& dir);

}  // namespace stgnn
