// Space-time signals and the elementary joint shifts.
//
// A signal X holds F features per node per discrete time step, stored as F
// dense N x T slices (column t = time t). The two 1-hop diffusions are
//
//   space: X^f -> S X^f          (multiply every slice by the GSO)
//   time:  X^f -> X^f C          (delay every node series one step)
//
// The time shift operator C is never materialized in the hot path; delays are
// column re-indexing. Circulant mode wraps at the horizon, ZeroPadDelay fills
// with zeros. The k-hop joint shift S^k X C^k is built incrementally,
// z_k = S z_{k-1} C, never through matrix powers.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stgnn/types.hpp"

namespace stgnn {

enum class TimeShiftMode { Circulant, ZeroPadDelay };

struct TimeShiftOperator {
  Index horizon = 1;  // T
  TimeShiftMode mode = TimeShiftMode::Circulant;

  // Dense T x T delay matrix with (X C).col(t) = X.col(t - 1). Only intended
  // for tests and spectral analysis; throws for horizon > 64.
  Matrixd materialize() const {
    if (horizon > 64)
      throw std::logic_error("TimeShiftOperator::materialize: refusing horizon > 64");
    Matrixd c = Matrixd::Zero(horizon, horizon);
    for (Index t = 1; t < horizon; ++t) c(t - 1, t) = 1.0;
    if (mode == TimeShiftMode::Circulant && horizon > 0) c(horizon - 1, 0) = 1.0;
    return c;
  }
};

template <typename Scalar>
class SpaceTimeSignal {
 public:
  using Matrix = DenseMatrix<Scalar>;

  SpaceTimeSignal() = default;

  // Zero signal of the given shape.
  SpaceTimeSignal(Index nodes, Index horizon, Index features) {
    if (nodes < 1 || horizon < 1 || features < 1)
      throw std::invalid_argument("SpaceTimeSignal: all dimensions must be >= 1");
    slices_.assign(static_cast<std::size_t>(features), Matrix::Zero(nodes, horizon));
  }

  static SpaceTimeSignal from_slices(std::vector<Matrix> slices) {
    if (slices.empty()) throw std::invalid_argument("SpaceTimeSignal: no feature slices");
    SpaceTimeSignal x;
    x.slices_ = std::move(slices);
    const Index n = x.slices_.front().rows();
    const Index t = x.slices_.front().cols();
    if (n < 1 || t < 1) throw std::invalid_argument("SpaceTimeSignal: empty slice");
    for (const Matrix& m : x.slices_)
      if (m.rows() != n || m.cols() != t)
        throw std::invalid_argument("SpaceTimeSignal: ragged feature slices");
    return x;
  }

  Index nodes() const { return slices_.empty() ? 0 : slices_.front().rows(); }
  Index horizon() const { return slices_.empty() ? 0 : slices_.front().cols(); }
  Index features() const { return static_cast<Index>(slices_.size()); }

  Matrix& slice(Index f) { return slices_[static_cast<std::size_t>(f)]; }
  const Matrix& slice(Index f) const { return slices_[static_cast<std::size_t>(f)]; }

  Scalar& operator()(Index n, Index t, Index f) { return slice(f)(n, t); }
  Scalar operator()(Index n, Index t, Index f) const { return slice(f)(n, t); }

  bool all_finite() const {
    for (const Matrix& m : slices_)
      if (!m.allFinite()) return false;
    return true;
  }

  Scalar squared_norm() const {
    Scalar s{0};
    for (const Matrix& m : slices_) s += m.squaredNorm();
    return s;
  }

 private:
  std::vector<Matrix> slices_;
};

using SpaceTimeSignald = SpaceTimeSignal<double>;

namespace detail {

// In-place one-step delay of every column: col(t) <- col(t - 1).
template <typename Scalar>
void delay_once(DenseMatrix<Scalar>& m, TimeShiftMode mode) {
  const Index t = m.cols();
  if (t == 0) return;
  DenseVector<Scalar> last = m.col(t - 1);
  for (Index c = t - 1; c > 0; --c) m.col(c) = m.col(c - 1);
  if (mode == TimeShiftMode::Circulant)
    m.col(0) = last;
  else
    m.col(0).setZero();
}

// In-place one-step advance (adjoint of delay_once): col(t) <- col(t + 1).
template <typename Scalar>
void advance_once(DenseMatrix<Scalar>& m, TimeShiftMode mode) {
  const Index t = m.cols();
  if (t == 0) return;
  DenseVector<Scalar> first = m.col(0);
  for (Index c = 0; c + 1 < t; ++c) m.col(c) = m.col(c + 1);
  if (mode == TimeShiftMode::Circulant)
    m.col(t - 1) = first;
  else
    m.col(t - 1).setZero();
}

}  // namespace detail

// Delay every node series k steps: X C^k.
template <typename Scalar>
SpaceTimeSignal<Scalar> time_shift(const SpaceTimeSignal<Scalar>& x, Index steps,
                                   const TimeShiftOperator& tso) {
  if (steps < 0) throw std::invalid_argument("time_shift: steps must be >= 0");
  if (x.horizon() != tso.horizon)
    throw std::invalid_argument("time_shift: operator horizon mismatch");
  const Index t = x.horizon();
  SpaceTimeSignal<Scalar> y(x.nodes(), t, x.features());
  for (Index f = 0; f < x.features(); ++f) {
    if (tso.mode == TimeShiftMode::Circulant) {
      for (Index c = 0; c < t; ++c) y.slice(f).col(c) = x.slice(f).col(((c - steps) % t + t) % t);
    } else {
      for (Index c = steps; c < t; ++c) y.slice(f).col(c) = x.slice(f).col(c - steps);
    }
  }
  return y;
}

// Advance every node series k steps: X (C^T)^k.
template <typename Scalar>
SpaceTimeSignal<Scalar> time_shift_adjoint(const SpaceTimeSignal<Scalar>& x, Index steps,
                                           const TimeShiftOperator& tso) {
  if (steps < 0) throw std::invalid_argument("time_shift_adjoint: steps must be >= 0");
  if (x.horizon() != tso.horizon)
    throw std::invalid_argument("time_shift_adjoint: operator horizon mismatch");
  const Index t = x.horizon();
  SpaceTimeSignal<Scalar> y(x.nodes(), t, x.features());
  for (Index f = 0; f < x.features(); ++f) {
    if (tso.mode == TimeShiftMode::Circulant) {
      for (Index c = 0; c < t; ++c) y.slice(f).col(c) = x.slice(f).col((c + steps) % t);
    } else {
      for (Index c = 0; c + steps < t; ++c) y.slice(f).col(c) = x.slice(f).col(c + steps);
    }
  }
  return y;
}

// Multiply every slice by the GSO: S X.
template <typename Scalar>
SpaceTimeSignal<Scalar> space_shift(const SpaceTimeSignal<Scalar>& x,
                                    const DenseMatrix<Scalar>& gso) {
  if (gso.rows() != gso.cols() || gso.rows() != x.nodes())
    throw std::invalid_argument("space_shift: GSO dimension mismatch");
  std::vector<DenseMatrix<Scalar>> slices;
  slices.reserve(static_cast<std::size_t>(x.features()));
  for (Index f = 0; f < x.features(); ++f) slices.push_back(gso * x.slice(f));
  return SpaceTimeSignal<Scalar>::from_slices(std::move(slices));
}

// k-hop joint shift S^k X C^k via the incremental recursion z_j = S z_{j-1} C.
template <typename Scalar>
SpaceTimeSignal<Scalar> spacetime_diffuse(const SpaceTimeSignal<Scalar>& x,
                                          const DenseMatrix<Scalar>& gso,
                                          const TimeShiftOperator& tso, Index hops) {
  if (hops < 0) throw std::invalid_argument("spacetime_diffuse: hops must be >= 0");
  if (gso.rows() != gso.cols() || gso.rows() != x.nodes())
    throw std::invalid_argument("spacetime_diffuse: GSO dimension mismatch");
  if (x.horizon() != tso.horizon)
    throw std::invalid_argument("spacetime_diffuse: operator horizon mismatch");
  SpaceTimeSignal<Scalar> z = x;
  for (Index j = 0; j < hops; ++j) {
    for (Index f = 0; f < z.features(); ++f) {
      z.slice(f) = gso * z.slice(f);
      detail::delay_once(z.slice(f), tso.mode);
    }
  }
  return z;
}

// Flat binary layout for double signals: three little-endian int64 header
// fields (N, T, F) followed by the entries as IEEE float64 in row-major
// (n, t, f) order with f fastest. Round-trips are bit-exact.
void save_signal(const SpaceTimeSignald& x, const std::string& path);
SpaceTimeSignald load_signal(const std::string& path);

}  // namespace stgnn
