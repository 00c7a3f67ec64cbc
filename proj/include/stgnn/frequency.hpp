// Multivariate frequency response of a space-time graph filter and the
// Lipschitz analysis built on it.
//
// Over a graph-frequency vector λ = [λ_1 .. λ_K] and a time frequency ω the
// response is
//
//   h(λ, ω) = sum_{k=0..K} h_k e^{jkω} prod_{κ=0..k} λ_κ,   λ_0 = 1.
//
// The response is affine in each λ_κ separately, which makes two facts exact:
// the mixed-point gradient turns the difference of two responses into an
// inner product with no remainder, and any per-coordinate-convex functional
// of the response (all the squared norms used here) attains its maximum over
// a λ box at a vertex of the box.
#pragma once

#include <complex>
#include <string>

#include "stgnn/filter.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

struct FrequencyPoint {
  Vectord lambda_vec;  // [λ_1 .. λ_K]; λ_0 = 1 is implicit and never stored
  double omega = 0.0;  // in [0, 2π)
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct LipschitzEstimate {
  double c_l = 0.0;
  std::string grid_spec;  // human-readable description of the sampled grid
};

// h(λ, ω) per the series above.
std::complex<double> frequency_response(const FilterTapsd& taps, const FrequencyPoint& pt);

// Mixed-point gradient: entry k is ∂h/∂λ_k evaluated at
// λ^(k) = [λ1_1 .. λ1_k, λ2_{k+1} .. λ2_K], so that
//   h(λ1, ω) − h(λ2, ω) = ∇ᵀ (λ1 − λ2)
// holds exactly (the response is affine in each coordinate, so the
// telescoping sum over coordinates has no second-order remainder).
Vectorcd lipschitz_gradient(const FilterTapsd& taps, const FrequencyPoint& pt1,
                            const FrequencyPoint& pt2, double omega);

// C_L = max over (λ1, λ2, ω) of max(‖∇‖₂, ‖λ1 ⊙ ∇‖₂) with λ1, λ2 ranging over
// the box [lo, hi]^K. Both squared norms are convex in every coordinate, so
// the λ maximization is exact over the box vertices; random interior pairs
// are added as a cross-check and ω is scanned on a grid whose density doubles
// until the estimate moves by less than 1%.
LipschitzEstimate estimate_c_l(const FilterTapsd& taps, const Interval& lambda_range,
                               Index omega_samples, Index lambda_samples);

// max |h(λ, ω)| over the box vertices, random λ draws, and an ω grid.
double filter_norm(const FilterTapsd& taps, const Interval& lambda_range, Index omega_samples,
                   Index lambda_samples);

}  // namespace stgnn
