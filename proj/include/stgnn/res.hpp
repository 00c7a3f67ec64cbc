// Random edge sampling: RES(G, p).
//
// A realization keeps each edge of the nominal graph independently with
// probability p (one Bernoulli draw per unordered pair, so realizations stay
// symmetric) and never adds edges. Kept edges keep their nominal weights.
// A sampled GSO decomposes as S_k = S + E_k with E_k supported on the dropped
// edges.
#pragma once

#include <cstdint>
#include <vector>

#include "stgnn/graph.hpp"
#include "stgnn/shift.hpp"

namespace stgnn {

struct RESConfig {
  double probability = 1.0;  // p in [0, 1]
  std::uint64_t seed = 0;
};

struct PerturbationSample {
  ShiftOperator sampled_gso;  // S_k, rebuilt from the sampled edge set
  Matrixd deviation;          // E_k = S_k - S
};

// One RES draw. Deterministic given cfg.seed; node set unchanged.
Graph res_sample(const Graph& nominal, const RESConfig& cfg);

// K independent draws, each rebuilt into a GSO of the nominal kind and paired
// with its deviation. Draw k uses derive_seed(cfg.seed, seed_stream::res_draw, k).
// The identity slot S_0 is not included; it is supplied by the filters.
std::vector<PerturbationSample> sample_gso_sequence(const ShiftOperator& nominal,
                                                    const RESConfig& cfg, int length);

}  // namespace stgnn
