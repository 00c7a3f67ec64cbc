#include "stgnn/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "stgnn/rng.hpp"

namespace stgnn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_range(const Interval& r, const char* who) {
  if (!(r.lo <= r.hi)) throw std::invalid_argument(std::string(who) + ": empty lambda range");
}

// Fills every coordinate of lambda from the bit pattern: bit κ set -> hi.
void vertex_from_bits(std::uint64_t bits, const Interval& r, Vectord& lambda) {
  for (Index k = 0; k < lambda.size(); ++k)
    lambda[k] = (bits >> k) & 1u ? r.hi : r.lo;
}

}  // namespace

std::complex<double> frequency_response(const FilterTapsd& taps, const FrequencyPoint& pt) {
  if (taps.h.empty()) throw std::invalid_argument("frequency_response: empty taps");
  if (pt.lambda_vec.size() != taps.order())
    throw std::invalid_argument("frequency_response: lambda length must equal filter order");
  // acc = sum_k h_k e^{jkω} prod_{κ<=k} λ_κ, built left to right.
  std::complex<double> acc(taps.h[0], 0.0);
  double prod = 1.0;
  for (Index k = 1; k <= taps.order(); ++k) {
    prod *= pt.lambda_vec[k - 1];
    acc += taps.h[static_cast<std::size_t>(k)] *
           std::polar(prod, static_cast<double>(k) * pt.omega);
  }
  return acc;
}

Vectorcd lipschitz_gradient(const FilterTapsd& taps, const FrequencyPoint& pt1,
                            const FrequencyPoint& pt2, double omega) {
  if (taps.h.empty()) throw std::invalid_argument("lipschitz_gradient: empty taps");
  const Index order = taps.order();
  if (pt1.lambda_vec.size() != order || pt2.lambda_vec.size() != order)
    throw std::invalid_argument("lipschitz_gradient: point order mismatch");
  Vectorcd grad(order);
  if (order == 0) return grad;
  // ∂h/∂λ_k at the mixed point = (prod_{κ<k} λ1_κ) · T_k with the suffix sums
  //   T_k = sum_{m=k..K} h_m e^{jmω} prod_{κ=k+1..m} λ2_κ
  // built by the backward recursion T_k = h_k e^{jkω} + λ2_{k+1} T_{k+1}.
  std::complex<double> suffix(0.0, 0.0);
  std::vector<std::complex<double>> t(static_cast<std::size_t>(order) + 1);
  for (Index k = order; k >= 1; --k) {
    suffix = taps.h[static_cast<std::size_t>(k)] * std::polar(1.0, static_cast<double>(k) * omega) +
             (k < order ? pt2.lambda_vec[k] * suffix : std::complex<double>(0.0, 0.0));
    t[static_cast<std::size_t>(k)] = suffix;
  }
  double prefix = 1.0;  // prod_{κ<k} λ1_κ
  for (Index k = 1; k <= order; ++k) {
    grad[k - 1] = prefix * t[static_cast<std::size_t>(k)];
    prefix *= pt1.lambda_vec[k - 1];
  }
  return grad;
}

namespace {

// max(‖∇‖₂, ‖λ1 ⊙ ∇‖₂) for one (λ1, λ2, ω) triple.
double pair_norms(const FilterTapsd& taps, const Vectord& l1, const Vectord& l2, double omega) {
  FrequencyPoint p1{l1, omega};
  FrequencyPoint p2{l2, omega};
  const Vectorcd grad = lipschitz_gradient(taps, p1, p2, omega);
  const double plain = grad.norm();
  const double hadamard = (l1.cast<std::complex<double>>().cwiseProduct(grad)).norm();
  return std::max(plain, hadamard);
}

// One sweep at a given density. Vertex pairs give the exact λ maximum per ω;
// the random pairs only cross-check that no interior point sneaks above it.
double scan_once(const FilterTapsd& taps, const Interval& range, Index omega_samples,
                 Index lambda_samples, std::uint64_t level) {
  const Index order = taps.order();
  std::vector<std::pair<Vectord, Vectord>> pairs;
  if (order <= 8) {
    const std::uint64_t vertices = 1ull << order;
    pairs.reserve(static_cast<std::size_t>(vertices * vertices));
    Vectord l1(order), l2(order);
    for (std::uint64_t b1 = 0; b1 < vertices; ++b1) {
      vertex_from_bits(b1, range, l1);
      for (std::uint64_t b2 = 0; b2 < vertices; ++b2) {
        vertex_from_bits(b2, range, l2);
        pairs.emplace_back(l1, l2);
      }
    }
  }
  Rng rng(derive_seed(0, seed_stream::grid_probe, level));
  for (Index i = 0; i < lambda_samples; ++i) {
    Vectord l1(order), l2(order);
    for (Index k = 0; k < order; ++k) l1[k] = rng.uniform(range.lo, range.hi);
    for (Index k = 0; k < order; ++k) l2[k] = rng.uniform(range.lo, range.hi);
    pairs.emplace_back(std::move(l1), std::move(l2));
  }
  double best = 0.0;
  for (Index i = 0; i < omega_samples; ++i) {
    const double omega = kTwoPi * static_cast<double>(i) / static_cast<double>(omega_samples);
    for (const auto& [l1, l2] : pairs) best = std::max(best, pair_norms(taps, l1, l2, omega));
  }
  return best;
}

}  // namespace

LipschitzEstimate estimate_c_l(const FilterTapsd& taps, const Interval& lambda_range,
                               Index omega_samples, Index lambda_samples) {
  check_range(lambda_range, "estimate_c_l");
  if (taps.h.empty()) throw std::invalid_argument("estimate_c_l: empty taps");
  if (omega_samples < 2 || lambda_samples < 2)
    throw std::invalid_argument("estimate_c_l: sample counts must be >= 2");
  const Index order = taps.order();
  if (order == 0)
    return {0.0, "constant filter: response has no lambda dependence"};
  double best = 0.0;
  Index n_omega = omega_samples;
  Index n_lambda = lambda_samples;
  std::uint64_t level = 0;
  // Doubling the ω grid keeps every previous node, so the running max can
  // only grow; stop once a full doubling moves it by < 1%.
  for (;;) {
    const double next = std::max(best, scan_once(taps, lambda_range, n_omega, n_lambda, level));
    const bool settled = level > 0 && next <= best * 1.01;
    best = next;
    if (settled || level >= 6) break;
    ++level;
    n_omega *= 2;
    n_lambda *= 2;
  }
  std::ostringstream spec;
  spec << "lambda box [" << lambda_range.lo << ", " << lambda_range.hi << "]^" << order
       << ", vertex pairs" << (order <= 8 ? "" : " skipped (order > 8)") << " + " << n_lambda
       << " random pairs, " << n_omega << " omega samples, " << (level + 1) << " refinement sweeps";
  return {best, spec.str()};
}

double filter_norm(const FilterTapsd& taps, const Interval& lambda_range, Index omega_samples,
                   Index lambda_samples) {
  check_range(lambda_range, "filter_norm");
  if (taps.h.empty()) throw std::invalid_argument("filter_norm: empty taps");
  if (omega_samples < 1 || lambda_samples < 0)
    throw std::invalid_argument("filter_norm: bad sample counts");
  const Index order = taps.order();
  std::vector<Vectord> points;
  if (order <= 16) {
    // |h|² is convex in each λ coordinate, so vertices carry the true maximum.
    const std::uint64_t vertices = 1ull << order;
    Vectord l(order);
    for (std::uint64_t b = 0; b < vertices; ++b) {
      vertex_from_bits(b, lambda_range, l);
      points.push_back(l);
    }
  }
  Rng rng(derive_seed(0, seed_stream::grid_probe, 0xf117e5));
  for (Index i = 0; i < lambda_samples; ++i) {
    Vectord l(order);
    for (Index k = 0; k < order; ++k) l[k] = rng.uniform(lambda_range.lo, lambda_range.hi);
    points.push_back(std::move(l));
  }
  double best = 0.0;
  for (Index i = 0; i < omega_samples; ++i) {
    const double omega = kTwoPi * static_cast<double>(i) / static_cast<double>(omega_samples);
    for (const Vectord& l : points)
      best = std::max(best, std::abs(frequency_response(taps, FrequencyPoint{l, omega})));
  }
  return best;
}

}  // namespace stgnn
