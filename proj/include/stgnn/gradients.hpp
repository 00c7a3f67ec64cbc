// Analytic gradients for space-time graph filters, layers, and the full
// model, plus the MSE imitation loss.
//
// For one filter with diffusions z_k (z_0 = X, z_k = S_k z_{k-1} C) and
// upstream gradient U:
//
//   dL/dh_k = <U, z_k>                       (full tensor inner product)
//   dL/dX   = sum_k h_k S_1^T .. S_k^T U (C^T)^k
//
// The input gradient is accumulated by the Horner-style recursion
// w_K = h_K U, w_{k-1} = h_{k-1} U + S_k^T advance(w_k), whose unrolled form
// is exactly the transposed chained products above (space and time act on
// different axes, so their transposes commute).
#pragma once

#include <stdexcept>
#include <vector>

#include "stgnn/filter.hpp"
#include "stgnn/model.hpp"
#include "stgnn/signal.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

template <typename Scalar>
struct StgfCache {
  std::vector<SpaceTimeSignal<Scalar>> z;  // diffusions z_0 .. z_K
};

template <typename Scalar>
struct StgfGrads {
  std::vector<Scalar> tap_grads;        // dL/dh_k
  SpaceTimeSignal<Scalar> input_grad;   // dL/dX
};

template <typename Scalar>
SpaceTimeSignal<Scalar> stgf_forward_with_cache(const SpaceTimeSignal<Scalar>& x,
                                                const FilterTaps<Scalar>& taps,
                                                const GsoSequenceFn<Scalar>& gso_at,
                                                const TimeShiftOperator& tso,
                                                StgfCache<Scalar>& cache) {
  cache.z = stgf_diffusions(x, gso_at, tso, taps.order());
  SpaceTimeSignal<Scalar> y(x.nodes(), x.horizon(), x.features());
  for (Index k = 0; k <= taps.order(); ++k)
    for (Index f = 0; f < x.features(); ++f)
      y.slice(f) += taps.h[static_cast<std::size_t>(k)] * cache.z[static_cast<std::size_t>(k)].slice(f);
  return y;
}

template <typename Scalar>
StgfGrads<Scalar> stgf_backward(const SpaceTimeSignal<Scalar>& upstream,
                                const StgfCache<Scalar>& cache, const FilterTaps<Scalar>& taps,
                                const GsoSequenceFn<Scalar>& gso_at,
                                const TimeShiftOperator& tso) {
  const Index order = taps.order();
  if (static_cast<Index>(cache.z.size()) != order + 1)
    throw std::invalid_argument("stgf_backward: cache does not match filter order");
  StgfGrads<Scalar> grads;
  grads.tap_grads.assign(static_cast<std::size_t>(order) + 1, Scalar(0));
  for (Index k = 0; k <= order; ++k) {
    Scalar acc{0};
    for (Index f = 0; f < upstream.features(); ++f)
      acc += (upstream.slice(f).array() * cache.z[static_cast<std::size_t>(k)].slice(f).array()).sum();
    grads.tap_grads[static_cast<std::size_t>(k)] = acc;
  }
  // w_K = h_K U; w_{k-1} = h_{k-1} U + S_k^T advance(w_k); input grad = w_0.
  SpaceTimeSignal<Scalar> w(upstream.nodes(), upstream.horizon(), upstream.features());
  for (Index f = 0; f < w.features(); ++f)
    w.slice(f) = taps.h[static_cast<std::size_t>(order)] * upstream.slice(f);
  for (Index k = order; k >= 1; --k) {
    const DenseMatrix<Scalar>& s = gso_at(k);
    for (Index f = 0; f < w.features(); ++f) {
      detail::advance_once(w.slice(f), tso.mode);
      w.slice(f) = s.transpose() * w.slice(f);
      w.slice(f) += taps.h[static_cast<std::size_t>(k - 1)] * upstream.slice(f);
    }
  }
  grads.input_grad = std::move(w);
  return grads;
}

// Spec-shaped wrappers for the fixed and sequence forms.
inline StgfGrads<double> stgf_backward(const SpaceTimeSignald& upstream,
                                       const StgfCache<double>& cache, const ShiftOperator& s,
                                       const TimeShiftOperator& tso, const FilterTapsd& taps) {
  GsoSequenceFn<double> gso_at = [&s](Index) -> const Matrixd& { return s.matrix; };
  return stgf_backward(upstream, cache, taps, gso_at, tso);
}

inline StgfGrads<double> generalized_stgf_backward(const SpaceTimeSignald& upstream,
                                                   const StgfCache<double>& cache,
                                                   const std::vector<ShiftOperator>& seq,
                                                   const TimeShiftOperator& tso,
                                                   const FilterTapsd& taps) {
  if (static_cast<Index>(seq.size()) != taps.order())
    throw std::invalid_argument("generalized_stgf_backward: sequence length must equal order");
  GsoSequenceFn<double> gso_at = [&seq](Index k) -> const Matrixd& {
    return seq[static_cast<std::size_t>(k - 1)].matrix;
  };
  return stgf_backward(upstream, cache, taps, gso_at, tso);
}

// Per-layer intermediates kept by the caching forward pass.
template <typename Scalar>
struct LayerCache {
  std::vector<std::vector<DenseMatrix<Scalar>>> z;  // [g][k] per-input-feature diffusions
  SpaceTimeSignal<Scalar> preactivation;
};

template <typename Scalar>
struct ForwardCache {
  std::vector<LayerCache<Scalar>> layers;
  SpaceTimeSignal<Scalar> hidden;  // activation entering the readout
};

// Gradients arranged exactly like the parameters they belong to.
template <typename Scalar>
using ModelGrads = Model<Scalar>;

template <typename Scalar>
SpaceTimeSignal<Scalar> forward_with_cache(const SpaceTimeSignal<Scalar>& x,
                                           const Model<Scalar>& model,
                                           const GsoSequenceFn<Scalar>& gso_at,
                                           const TimeShiftOperator& tso,
                                           ForwardCache<Scalar>& cache) {
  if (x.features() != model.config.input_features)
    throw std::invalid_argument("forward_with_cache: input feature count mismatch");
  cache.layers.clear();
  cache.layers.reserve(model.layers.size());
  SpaceTimeSignal<Scalar> h = x;
  for (const LayerParams<Scalar>& layer : model.layers) {
    LayerCache<Scalar> lc;
    const Index order = layer.order();
    lc.z.resize(static_cast<std::size_t>(h.features()));
    for (Index g = 0; g < h.features(); ++g) {
      auto& zg = lc.z[static_cast<std::size_t>(g)];
      zg.reserve(static_cast<std::size_t>(order) + 1);
      zg.push_back(h.slice(g));
      for (Index k = 1; k <= order; ++k) {
        DenseMatrix<Scalar> next = gso_at(k) * zg.back();
        detail::delay_once(next, tso.mode);
        zg.push_back(std::move(next));
      }
    }
    SpaceTimeSignal<Scalar> pre(h.nodes(), h.horizon(), layer.out_features);
    for (Index f = 0; f < layer.out_features; ++f) {
      DenseMatrix<Scalar>& acc = pre.slice(f);
      for (Index g = 0; g < layer.in_features; ++g) {
        const auto& taps = layer.tap(f, g).h;
        const auto& zg = lc.z[static_cast<std::size_t>(g)];
        for (Index k = 0; k <= order; ++k)
          acc += taps[static_cast<std::size_t>(k)] * zg[static_cast<std::size_t>(k)];
      }
    }
    lc.preactivation = pre;
    cache.layers.push_back(std::move(lc));
    h = nonlinearity_apply(pre, model.config.nonlinearity);
  }
  cache.hidden = h;
  return apply_readout(h, model.readout);
}

template <typename Scalar>
struct BackwardResult {
  ModelGrads<Scalar> grads;
  SpaceTimeSignal<Scalar> input_grad;
};

// Zero-filled gradient holder shaped like the model.
template <typename Scalar>
ModelGrads<Scalar> zero_grads_like(const Model<Scalar>& model) {
  ModelGrads<Scalar> g = model;
  for (LayerParams<Scalar>& layer : g.layers)
    for (FilterTaps<Scalar>& taps : layer.taps)
      std::fill(taps.h.begin(), taps.h.end(), Scalar(0));
  g.readout.weight.setZero();
  g.readout.bias.setZero();
  return g;
}

template <typename Scalar>
BackwardResult<Scalar> model_backward(const SpaceTimeSignal<Scalar>& upstream,
                                      const Model<Scalar>& model,
                                      const ForwardCache<Scalar>& cache,
                                      const GsoSequenceFn<Scalar>& gso_at,
                                      const TimeShiftOperator& tso) {
  if (cache.layers.size() != model.layers.size())
    throw std::invalid_argument("model_backward: cache does not match model depth");
  BackwardResult<Scalar> result;
  result.grads = zero_grads_like(model);
  // Readout: dW(f,g) = <U_f, H_g>, db(f) = sum U_f, dH_g = sum_f W(f,g) U_f.
  const SpaceTimeSignal<Scalar>& hidden = cache.hidden;
  SpaceTimeSignal<Scalar> d_h(hidden.nodes(), hidden.horizon(), hidden.features());
  for (Index f = 0; f < model.readout.weight.rows(); ++f) {
    result.grads.readout.bias[f] = upstream.slice(f).sum();
    for (Index g = 0; g < hidden.features(); ++g) {
      result.grads.readout.weight(f, g) =
          (upstream.slice(f).array() * hidden.slice(g).array()).sum();
      d_h.slice(g) += model.readout.weight(f, g) * upstream.slice(f);
    }
  }
  // Layers, deepest first.
  for (std::size_t li = model.layers.size(); li-- > 0;) {
    const LayerParams<Scalar>& layer = model.layers[li];
    const LayerCache<Scalar>& lc = cache.layers[li];
    LayerParams<Scalar>& layer_grads = result.grads.layers[li];
    const Index order = layer.order();
    // d_pre = d_h ⊙ sigma'(pre)
    SpaceTimeSignal<Scalar> d_pre = d_h;
    for (Index f = 0; f < d_pre.features(); ++f)
      d_pre.slice(f).array() *=
          lc.preactivation.slice(f)
              .unaryExpr([&model](Scalar v) {
                return nonlinearity_derivative_scalar(v, model.config.nonlinearity);
              })
              .array();
    // Tap gradients: dh_k^{fg} = <d_pre_f, z_k^g>.
    for (Index f = 0; f < layer.out_features; ++f)
      for (Index g = 0; g < layer.in_features; ++g) {
        auto& h_grad = layer_grads.tap(f, g).h;
        const auto& zg = lc.z[static_cast<std::size_t>(g)];
        for (Index k = 0; k <= order; ++k)
          h_grad[static_cast<std::size_t>(k)] =
              (d_pre.slice(f).array() * zg[static_cast<std::size_t>(k)].array()).sum();
      }
    // Input gradient per feature g via the Horner recursion on
    // u_k^g = sum_f h_k^{fg} d_pre_f.
    SpaceTimeSignal<Scalar> d_x(d_pre.nodes(), d_pre.horizon(), layer.in_features);
    for (Index g = 0; g < layer.in_features; ++g) {
      DenseMatrix<Scalar> w = DenseMatrix<Scalar>::Zero(d_pre.nodes(), d_pre.horizon());
      for (Index f = 0; f < layer.out_features; ++f)
        w += layer.tap(f, g).h[static_cast<std::size_t>(order)] * d_pre.slice(f);
      for (Index k = order; k >= 1; --k) {
        detail::advance_once(w, tso.mode);
        w = gso_at(k).transpose() * w;
        for (Index f = 0; f < layer.out_features; ++f)
          w += layer.tap(f, g).h[static_cast<std::size_t>(k - 1)] * d_pre.slice(f);
      }
      d_x.slice(g) = std::move(w);
    }
    d_h = std::move(d_x);
  }
  result.input_grad = std::move(d_h);
  return result;
}

template <typename Scalar>
struct LossValue {
  Scalar loss{0};
  SpaceTimeSignal<Scalar> grad;  // dL/dpred
};

// Mean squared error over all entries; grad = 2 (pred - target) / count.
template <typename Scalar>
LossValue<Scalar> mse_loss(const SpaceTimeSignal<Scalar>& pred,
                           const SpaceTimeSignal<Scalar>& target) {
  if (pred.nodes() != target.nodes() || pred.horizon() != target.horizon() ||
      pred.features() != target.features())
    throw std::invalid_argument("mse_loss: shape mismatch");
  const Scalar count =
      static_cast<Scalar>(pred.nodes() * pred.horizon() * pred.features());
  LossValue<Scalar> out;
  out.grad = SpaceTimeSignal<Scalar>(pred.nodes(), pred.horizon(), pred.features());
  for (Index f = 0; f < pred.features(); ++f) {
    const DenseMatrix<Scalar> diff = pred.slice(f) - target.slice(f);
    out.loss += diff.squaredNorm();
    out.grad.slice(f) = (Scalar(2) / count) * diff;
  }
  out.loss /= count;
  return out;
}

}  // namespace stgnn
