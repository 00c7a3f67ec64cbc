// Space-time graph filters.
//
// A filter of order K with taps h_0..h_K maps
//
//   Y = sum_{k=0..K} h_k S^k X C^k                  (fixed GSO)
//   Y = sum_{k=0..K} h_k S_k ... S_1 X C^k          (one GSO per hop)
//
// Both share one accumulation routine parameterized by the GSO for hop k, so
// feeding the same operator at every hop reproduces the fixed-GSO output bit
// for bit. Diffusions are built incrementally, z_k = S_k z_{k-1} C.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stgnn/shift.hpp"
#include "stgnn/signal.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

template <typename Scalar>
struct FilterTaps {
  std::vector<Scalar> h;  // h[k] multiplies the k-hop diffusion

  Index order() const { return static_cast<Index>(h.size()) - 1; }
};

using FilterTapsd = FilterTaps<double>;

// Reference to the GSO applied at hop k (k = 1..K, hop 0 is the identity).
template <typename Scalar>
using GsoSequenceFn = std::function<const DenseMatrix<Scalar>&(Index)>;

// All diffusions z_0 = X, z_k = S_k z_{k-1} C for k = 1..K. The layer forward
// and the tap gradients both consume this list.
template <typename Scalar>
std::vector<SpaceTimeSignal<Scalar>> stgf_diffusions(const SpaceTimeSignal<Scalar>& x,
                                                     const GsoSequenceFn<Scalar>& gso_at,
                                                     const TimeShiftOperator& tso, Index order) {
  if (order < 0) throw std::invalid_argument("stgf_diffusions: order must be >= 0");
  if (x.horizon() != tso.horizon)
    throw std::invalid_argument("stgf_diffusions: operator horizon mismatch");
  std::vector<SpaceTimeSignal<Scalar>> z;
  z.reserve(static_cast<std::size_t>(order) + 1);
  z.push_back(x);
  for (Index k = 1; k <= order; ++k) {
    const DenseMatrix<Scalar>& s = gso_at(k);
    if (s.rows() != s.cols() || s.rows() != x.nodes())
      throw std::invalid_argument("stgf_diffusions: GSO dimension mismatch");
    SpaceTimeSignal<Scalar> next = z.back();
    for (Index f = 0; f < next.features(); ++f) {
      next.slice(f) = s * next.slice(f);
      detail::delay_once(next.slice(f), tso.mode);
    }
    z.push_back(std::move(next));
  }
  return z;
}

template <typename Scalar>
SpaceTimeSignal<Scalar> accumulate_stgf(const SpaceTimeSignal<Scalar>& x,
                                        const FilterTaps<Scalar>& taps,
                                        const GsoSequenceFn<Scalar>& gso_at,
                                        const TimeShiftOperator& tso) {
  if (taps.h.empty()) throw std::invalid_argument("accumulate_stgf: empty taps");
  if (x.horizon() != tso.horizon)
    throw std::invalid_argument("accumulate_stgf: operator horizon mismatch");
  SpaceTimeSignal<Scalar> z = x;
  SpaceTimeSignal<Scalar> y(x.nodes(), x.horizon(), x.features());
  for (Index f = 0; f < x.features(); ++f) y.slice(f) = taps.h[0] * x.slice(f);
  for (Index k = 1; k <= taps.order(); ++k) {
    const DenseMatrix<Scalar>& s = gso_at(k);
    if (s.rows() != s.cols() || s.rows() != x.nodes())
      throw std::invalid_argument("accumulate_stgf: GSO dimension mismatch");
    for (Index f = 0; f < z.features(); ++f) {
      z.slice(f) = s * z.slice(f);
      detail::delay_once(z.slice(f), tso.mode);
      y.slice(f) += taps.h[static_cast<std::size_t>(k)] * z.slice(f);
    }
  }
  return y;
}

// Fixed-GSO filter, Y = sum_k h_k S^k X C^k.
template <typename Scalar>
SpaceTimeSignal<Scalar> apply_stgf(const SpaceTimeSignal<Scalar>& x, const FilterTaps<Scalar>& taps,
                                   const DenseMatrix<Scalar>& gso, const TimeShiftOperator& tso) {
  GsoSequenceFn<Scalar> gso_at = [&gso](Index) -> const DenseMatrix<Scalar>& { return gso; };
  return accumulate_stgf(x, taps, gso_at, tso);
}

// Time-varying filter over the GSO sequence S_1..S_K (gsos[k-1] is S_k).
template <typename Scalar>
SpaceTimeSignal<Scalar> apply_generalized_stgf(const SpaceTimeSignal<Scalar>& x,
                                               const FilterTaps<Scalar>& taps,
                                               const std::vector<DenseMatrix<Scalar>>& gsos,
                                               const TimeShiftOperator& tso) {
  if (static_cast<Index>(gsos.size()) < taps.order())
    throw std::invalid_argument("apply_generalized_stgf: too few GSOs for filter order");
  GsoSequenceFn<Scalar> gso_at = [&gsos](Index k) -> const DenseMatrix<Scalar>& {
    return gsos[static_cast<std::size_t>(k - 1)];
  };
  return accumulate_stgf(x, taps, gso_at, tso);
}

inline SpaceTimeSignald apply_stgf(const SpaceTimeSignald& x, const ShiftOperator& s,
                                   const TimeShiftOperator& tso, const FilterTapsd& taps) {
  return apply_stgf(x, taps, s.matrix, tso);
}

inline SpaceTimeSignald apply_generalized_stgf(const SpaceTimeSignald& x,
                                               const std::vector<ShiftOperator>& seq,
                                               const TimeShiftOperator& tso,
                                               const FilterTapsd& taps) {
  if (static_cast<Index>(seq.size()) != taps.order())
    throw std::invalid_argument("apply_generalized_stgf: sequence length must equal filter order");
  GsoSequenceFn<double> gso_at = [&seq](Index k) -> const Matrixd& {
    return seq[static_cast<std::size_t>(k - 1)].matrix;
  };
  return accumulate_stgf(x, taps, gso_at, tso);
}

// Text format: first line K, then one coefficient per line, 17 significant
// digits so doubles round-trip exactly.
void save_taps(const FilterTapsd& taps, const std::string& path);
FilterTapsd load_taps(const std::string& path);

}  // namespace stgnn
