// Bias-corrected ADAM over the model's parameter blocks.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "stgnn/gradients.hpp"
#include "stgnn/model.hpp"

namespace stgnn {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Applies fn(param_like_value...) to corresponding scalars of structurally
// identical models; the canonical order is layers (taps row-major, ascending
// hop), then readout weight (row-major), then bias.
template <typename Scalar, typename Fn>
void for_each_param(Model<Scalar>& a, Model<Scalar>& b, Model<Scalar>& c, const Model<Scalar>& g,
                    Fn&& fn) {
  if (a.layers.size() != g.layers.size())
    throw std::invalid_argument("for_each_param: model shapes differ");
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    auto& la = a.layers[l].taps;
    auto& lb = b.layers[l].taps;
    auto& lc = c.layers[l].taps;
    const auto& lg = g.layers[l].taps;
    if (la.size() != lg.size()) throw std::invalid_argument("for_each_param: layer shapes differ");
    for (std::size_t i = 0; i < la.size(); ++i) {
      if (la[i].h.size() != lg[i].h.size())
        throw std::invalid_argument("for_each_param: tap counts differ");
      for (std::size_t k = 0; k < la[i].h.size(); ++k)
        fn(la[i].h[k], lb[i].h[k], lc[i].h[k], lg[i].h[k]);
    }
  }
  if (a.readout.weight.rows() != g.readout.weight.rows() ||
      a.readout.weight.cols() != g.readout.weight.cols() ||
      a.readout.bias.size() != g.readout.bias.size())
    throw std::invalid_argument("for_each_param: readout shapes differ");
  for (Index i = 0; i < a.readout.weight.rows(); ++i)
    for (Index j = 0; j < a.readout.weight.cols(); ++j)
      fn(a.readout.weight(i, j), b.readout.weight(i, j), c.readout.weight(i, j),
         g.readout.weight(i, j));
  for (Index i = 0; i < a.readout.bias.size(); ++i)
    fn(a.readout.bias[i], b.readout.bias[i], c.readout.bias[i], g.readout.bias[i]);
}

// Two-model variant, e.g. accumulating one gradient into another.
template <typename Scalar, typename Fn>
void for_each_param_pair(Model<Scalar>& a, const Model<Scalar>& g, Fn&& fn) {
  if (a.layers.size() != g.layers.size())
    throw std::invalid_argument("for_each_param_pair: model shapes differ");
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    auto& la = a.layers[l].taps;
    const auto& lg = g.layers[l].taps;
    if (la.size() != lg.size())
      throw std::invalid_argument("for_each_param_pair: layer shapes differ");
    for (std::size_t i = 0; i < la.size(); ++i) {
      if (la[i].h.size() != lg[i].h.size())
        throw std::invalid_argument("for_each_param_pair: tap counts differ");
      for (std::size_t k = 0; k < la[i].h.size(); ++k) fn(la[i].h[k], lg[i].h[k]);
    }
  }
  if (a.readout.weight.rows() != g.readout.weight.rows() ||
      a.readout.weight.cols() != g.readout.weight.cols() ||
      a.readout.bias.size() != g.readout.bias.size())
    throw std::invalid_argument("for_each_param_pair: readout shapes differ");
  for (Index i = 0; i < a.readout.weight.rows(); ++i)
    for (Index j = 0; j < a.readout.weight.cols(); ++j)
      fn(a.readout.weight(i, j), g.readout.weight(i, j));
  for (Index i = 0; i < a.readout.bias.size(); ++i) fn(a.readout.bias[i], g.readout.bias[i]);
}

template <typename Scalar>
struct AdamState {
  AdamConfig config;
  Model<Scalar> first_moment;
  Model<Scalar> second_moment;
  std::uint64_t step = 0;

  explicit AdamState(const Model<Scalar>& model, AdamConfig cfg = {})
      : config(cfg),
        first_moment(zero_grads_like(model)),
        second_moment(zero_grads_like(model)) {}
};

// x <- x - lr * m_hat / (sqrt(v_hat) + eps) with standard bias correction.
template <typename Scalar>
void adam_step(Model<Scalar>& model, const ModelGrads<Scalar>& grads, AdamState<Scalar>& state) {
  ++state.step;
  const double b1 = state.config.beta1;
  const double b2 = state.config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  const double lr = state.config.learning_rate;
  const double eps = state.config.epsilon;
  for_each_param(model, state.first_moment, state.second_moment, grads,
                 [&](Scalar& x, Scalar& m, Scalar& v, const Scalar& g) {
                   m = Scalar(b1) * m + Scalar(1.0 - b1) * g;
                   v = Scalar(b2) * v + Scalar(1.0 - b2) * g * g;
                   const double m_hat = static_cast<double>(m) / correction1;
                   const double v_hat = static_cast<double>(v) / correction2;
                   x -= Scalar(lr * m_hat / (std::sqrt(v_hat) + eps));
                 });
}

}  // namespace stgnn
