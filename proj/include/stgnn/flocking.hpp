// Planar flocking environment: double-integrator agents, proximity
// communication graphs, the centralized consensus-plus-collision controller
// used as the imitation target, dataset generation, and closed-loop rollout
// of a learned decentralized policy.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stgnn/graph.hpp"
#include "stgnn/model.hpp"
#include "stgnn/shift.hpp"
#include "stgnn/signal.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

struct FlockConfig {
  Index agent_count = 20;           // N
  double comm_radius = 2.0;         // R in meters
  double dt = 0.01;                 // seconds per step
  Index horizon = 200;              // T steps (2-second episodes)
  double max_accel = 10.0;          // per-agent saturation, m/s^2
  double init_position_box = 0.0;   // box side; <= 0 selects sqrt(N) * R / 2
  double init_velocity_range = 1.0; // per-axis uniform [-v, v]
  double collision_floor = 0.1;     // minimum initial pairwise spacing, m
  double interaction_cutoff = 0.0;  // potential cutoff; <= 0 selects R
  std::uint64_t seed = 0;

  void validate() const;
  double box_side() const;
  double cutoff() const;
};

struct FlockState {
  Matrixd positions;   // N x 2
  Matrixd velocities;  // N x 2
};

struct Trajectory {
  std::vector<FlockState> states;  // T states; states[t+1] = step(states[t], u_t)
  SpaceTimeSignald accelerations;  // N x T x 2 applied accelerations
  std::vector<Graph> graphs;       // T communication graphs, graphs[t] from states[t]
};

// Proximity graph: edge (i, j) iff ||p_i - p_j|| <= radius, i != j, weight 1.
Graph communication_graph(const FlockState& state, double radius);

// Centralized imitation target:
//   u_i = -sum_{j != i} (v_i - v_j) - sum_{j : r_ij < cutoff} grad_{p_i} U(r_ij)
// with collision potential U(r) = 1/r^2 + log r^2, clipped per agent to
// max_accel. With global = false both sums run over communication neighbors
// only. Throws on coincident agents.
Matrixd optimal_controller(const FlockState& state, const FlockConfig& cfg, bool global = true);

// v <- v + u dt; p <- p + v_old dt + u dt^2 / 2.
FlockState step_dynamics(const FlockState& state, const Matrixd& accel, double dt);

// Collision-free random initial state; throws past the rejection retry limit.
FlockState sample_initial_state(const FlockConfig& cfg, std::uint64_t seed);

// Rolls out the given per-state policy (already saturated outputs are clipped
// again for safety), recording states, accelerations, and live graphs.
Trajectory policy_rollout(const std::function<Matrixd(const FlockState&)>& policy,
                          const FlockConfig& cfg, const FlockState& initial);

// Optimal-controller episode from a fresh initial state.
Trajectory optimal_trajectory(const FlockConfig& cfg, std::uint64_t seed);

// Raw per-node features (p_x, p_y, v_x, v_y) of a recorded trajectory.
SpaceTimeSignald trajectory_features(const Trajectory& traj);

// Instantaneous velocity-variation cost sum_i ||v_i - mean_j v_j||^2.
double velocity_variation(const FlockState& state);

// Sum of the instantaneous cost over all recorded states.
double validation_cost(const Trajectory& traj);

struct TrainingExample {
  SpaceTimeSignald features;  // N x T x 4
  SpaceTimeSignald targets;   // N x T x 2 clipped optimal accelerations
  std::vector<Graph> graphs;  // per-step communication graphs
  std::uint64_t seed = 0;     // per-example derived seed

  FlockState initial_state() const;
};

struct Dataset {
  FlockConfig config;
  std::vector<TrainingExample> train;
  std::vector<TrainingExample> validation;
  std::vector<TrainingExample> test;
};

struct SplitCounts {
  Index train = 40;
  Index validation = 8;
  Index test = 8;
};

// Optimal-controller episodes with per-example seeds derived from cfg.seed;
// deterministic and independent of generation order.
Dataset generate_dataset(const FlockConfig& cfg, const SplitCounts& counts);

// On-disk layout: manifest.json plus per-example directories holding
// features.bin / targets.bin (signal tensor layout) and graphs/step_<t>.txt.
void save_dataset(const Dataset& data, const std::string& dir);
Dataset load_dataset(const std::string& dir);

enum class RolloutMode { FixedGraph, TimeVarying, ResSampled };

struct RolloutOptions {
  RolloutMode mode = RolloutMode::TimeVarying;
  GsoKind gso_kind = GsoKind::Adjacency;  // for graphs built or sampled live
  ShiftOperator nominal;                  // FixedGraph / ResSampled reference
  double res_probability = 1.0;
  std::uint64_t res_seed = 0;
};

// Closed-loop rollout of a trained model: at each step the model sees the
// trailing window of K+1 feature columns (zero-padded before the episode),
// the prediction at the newest column is saturated and fed to the dynamics.
// Hop k of the generalized filter uses the graph from k-1 steps back
// (the newest graph enters first). Throws DivergenceError on non-finite
// predictions.
Trajectory closed_loop_rollout(const Modeld& model, const FlockConfig& cfg,
                               const FlockState& initial, const RolloutOptions& opts);

}  // namespace stgnn
