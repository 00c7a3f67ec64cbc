#include "stgnn/res.hpp"

#include <stdexcept>

#include "stgnn/rng.hpp"

namespace stgnn {

Graph res_sample(const Graph& nominal, const RESConfig& cfg) {
  if (!(cfg.probability >= 0.0 && cfg.probability <= 1.0))
    throw std::invalid_argument("res_sample: probability must lie in [0, 1]");
  Rng rng(cfg.seed);
  Graph sampled(nominal.node_count());
  for (const Edge& e : nominal.edges()) {
    // canonical() < 1 always, so p = 1 keeps every edge for every seed.
    if (rng.bernoulli(cfg.probability)) sampled.add_edge(e.i, e.j, e.weight);
  }
  return sampled;
}

std::vector<PerturbationSample> sample_gso_sequence(const ShiftOperator& nominal,
                                                    const RESConfig& cfg, int length) {
  if (length < 1) throw std::invalid_argument("sample_gso_sequence: length must be >= 1");
  std::vector<PerturbationSample> sequence;
  sequence.reserve(static_cast<std::size_t>(length));
  for (int k = 0; k < length; ++k) {
    RESConfig draw{cfg.probability, derive_seed(cfg.seed, seed_stream::res_draw,
                                                static_cast<std::uint64_t>(k))};
    ShiftOperator sampled = build_gso(res_sample(nominal.source, draw), nominal.kind);
    Matrixd deviation = sampled.matrix - nominal.matrix;
    sequence.push_back(PerturbationSample{std::move(sampled), std::move(deviation)});
  }
  return sequence;
}

}  // namespace stgnn
