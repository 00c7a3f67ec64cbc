#include "stgnn/flocking.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stgnn/errors.hpp"
#include "stgnn/res.hpp"
#include "stgnn/rng.hpp"

namespace stgnn {

namespace fs = std::filesystem;
using nlohmann::json;

void FlockConfig::validate() const {
  if (agent_count < 2) throw std::invalid_argument("FlockConfig: need at least 2 agents");
  if (!(comm_radius > 0.0)) throw std::invalid_argument("FlockConfig: comm_radius must be > 0");
  if (!(dt > 0.0)) throw std::invalid_argument("FlockConfig: dt must be > 0");
  if (horizon < 2) throw std::invalid_argument("FlockConfig: horizon must be >= 2");
  if (!(max_accel > 0.0)) throw std::invalid_argument("FlockConfig: max_accel must be > 0");
  if (!(init_velocity_range >= 0.0))
    throw std::invalid_argument("FlockConfig: init_velocity_range must be >= 0");
  if (!(collision_floor > 0.0))
    throw std::invalid_argument("FlockConfig: collision_floor must be > 0");
}

double FlockConfig::box_side() const {
  // Sized so the initial proximity graph is connected with high probability.
  if (init_position_box > 0.0) return init_position_box;
  return std::sqrt(static_cast<double>(agent_count)) * comm_radius / 2.0;
}

double FlockConfig::cutoff() const {
  return interaction_cutoff > 0.0 ? interaction_cutoff : comm_radius;
}

Graph communication_graph(const FlockState& state, double radius) {
  const Index n = state.positions.rows();
  Graph g(n);
  const double r2 = radius * radius;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double dx = state.positions(i, 0) - state.positions(j, 0);
      const double dy = state.positions(i, 1) - state.positions(j, 1);
      if (dx * dx + dy * dy <= r2) g.add_edge(i, j, 1.0);
    }
  return g;
}

Matrixd optimal_controller(const FlockState& state, const FlockConfig& cfg, bool global) {
  const Index n = state.positions.rows();
  if (state.velocities.rows() != n || state.positions.cols() != 2 ||
      state.velocities.cols() != 2)
    throw std::invalid_argument("optimal_controller: malformed state");
  const double cutoff = cfg.cutoff();
  const double comm2 = cfg.comm_radius * cfg.comm_radius;
  Matrixd u = Matrixd::Zero(n, 2);
  // Pairwise pass: each unordered pair contributes equal and opposite
  // potential forces (computed once so the antisymmetry is exact) and the
  // velocity-consensus pulls -(v_i - v_j) / +(v_i - v_j).
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double dx = state.positions(i, 0) - state.positions(j, 0);
      const double dy = state.positions(i, 1) - state.positions(j, 1);
      const double r2 = dx * dx + dy * dy;
      if (r2 == 0.0)
        throw std::invalid_argument("optimal_controller: coincident agents, state is invalid");
      const bool neighbors = r2 <= comm2;
      if (global || neighbors) {
        const double dvx = state.velocities(i, 0) - state.velocities(j, 0);
        const double dvy = state.velocities(i, 1) - state.velocities(j, 1);
        u(i, 0) -= dvx;
        u(i, 1) -= dvy;
        u(j, 0) += dvx;
        u(j, 1) += dvy;
      }
      if (r2 < cutoff * cutoff) {
        // -grad_{p_i} U with U(r) = 1/r^2 + log r^2:
        //   (p_i - p_j) (2/r^4 - 2/r^2), repulsive below r = 1, cohesive above.
        const double coeff = 2.0 / (r2 * r2) - 2.0 / r2;
        u(i, 0) += coeff * dx;
        u(i, 1) += coeff * dy;
        u(j, 0) -= coeff * dx;
        u(j, 1) -= coeff * dy;
      }
    }
  for (Index i = 0; i < n; ++i) {
    const double norm = std::hypot(u(i, 0), u(i, 1));
    if (norm > cfg.max_accel) u.row(i) *= cfg.max_accel / norm;
  }
  return u;
}

FlockState step_dynamics(const FlockState& state, const Matrixd& accel, double dt) {
  if (accel.rows() != state.positions.rows() || accel.cols() != 2)
    throw std::invalid_argument("step_dynamics: acceleration shape mismatch");
  FlockState next;
  next.positions = state.positions + dt * state.velocities + (0.5 * dt * dt) * accel;
  next.velocities = state.velocities + dt * accel;
  return next;
}

FlockState sample_initial_state(const FlockConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const Index n = cfg.agent_count;
  const double side = cfg.box_side();
  const double floor2 = cfg.collision_floor * cfg.collision_floor;
  Rng rng(seed);
  FlockState state;
  state.positions.resize(n, 2);
  state.velocities.resize(n, 2);
  constexpr int kMaxAttempts = 10000;
  for (Index i = 0; i < n; ++i) {
    int attempts = 0;
    for (;;) {
      if (++attempts > kMaxAttempts)
        throw std::runtime_error(
            "sample_initial_state: cannot place agents collision-free; "
            "box too small for the requested spacing");
      const double x = rng.uniform(-side / 2.0, side / 2.0);
      const double y = rng.uniform(-side / 2.0, side / 2.0);
      bool clear = true;
      for (Index j = 0; j < i; ++j) {
        const double dx = x - state.positions(j, 0);
        const double dy = y - state.positions(j, 1);
        if (dx * dx + dy * dy < floor2) {
          clear = false;
          break;
        }
      }
      if (clear) {
        state.positions(i, 0) = x;
        state.positions(i, 1) = y;
        break;
      }
    }
  }
  for (Index i = 0; i < n; ++i) {
    state.velocities(i, 0) = rng.uniform(-cfg.init_velocity_range, cfg.init_velocity_range);
    state.velocities(i, 1) = rng.uniform(-cfg.init_velocity_range, cfg.init_velocity_range);
  }
  return state;
}

namespace {

Matrixd clip_rows(const Matrixd& u, double max_norm) {
  Matrixd out = u;
  for (Index i = 0; i < out.rows(); ++i) {
    const double norm = out.row(i).norm();
    if (norm > max_norm) out.row(i) *= max_norm / norm;
  }
  return out;
}

}  // namespace

Trajectory policy_rollout(const std::function<Matrixd(const FlockState&)>& policy,
                          const FlockConfig& cfg, const FlockState& initial) {
  cfg.validate();
  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(cfg.horizon));
  traj.graphs.reserve(static_cast<std::size_t>(cfg.horizon));
  traj.accelerations = SpaceTimeSignald(cfg.agent_count, cfg.horizon, 2);
  FlockState state = initial;
  for (Index t = 0; t < cfg.horizon; ++t) {
    traj.states.push_back(state);
    traj.graphs.push_back(communication_graph(state, cfg.comm_radius));
    const Matrixd u = clip_rows(policy(state), cfg.max_accel);
    for (Index i = 0; i < cfg.agent_count; ++i) {
      traj.accelerations(i, t, 0) = u(i, 0);
      traj.accelerations(i, t, 1) = u(i, 1);
    }
    if (t + 1 < cfg.horizon) state = step_dynamics(state, u, cfg.dt);
  }
  return traj;
}

Trajectory optimal_trajectory(const FlockConfig& cfg, std::uint64_t seed) {
  const FlockState initial = sample_initial_state(cfg, seed);
  return policy_rollout(
      [&cfg](const FlockState& s) { return optimal_controller(s, cfg, true); }, cfg, initial);
}

SpaceTimeSignald trajectory_features(const Trajectory& traj) {
  const Index t_len = static_cast<Index>(traj.states.size());
  if (t_len == 0) throw std::invalid_argument("trajectory_features: empty trajectory");
  const Index n = traj.states.front().positions.rows();
  SpaceTimeSignald x(n, t_len, 4);
  for (Index t = 0; t < t_len; ++t) {
    const FlockState& s = traj.states[static_cast<std::size_t>(t)];
    for (Index i = 0; i < n; ++i) {
      x(i, t, 0) = s.positions(i, 0);
      x(i, t, 1) = s.positions(i, 1);
      x(i, t, 2) = s.velocities(i, 0);
      x(i, t, 3) = s.velocities(i, 1);
    }
  }
  return x;
}

double velocity_variation(const FlockState& state) {
  const Eigen::RowVector2d mean = state.velocities.colwise().mean();
  double cost = 0.0;
  for (Index i = 0; i < state.velocities.rows(); ++i)
    cost += (state.velocities.row(i) - mean).squaredNorm();
  return cost;
}

double validation_cost(const Trajectory& traj) {
  double cost = 0.0;
  for (const FlockState& s : traj.states) cost += velocity_variation(s);
  return cost;
}

FlockState TrainingExample::initial_state() const {
  FlockState s;
  const Index n = features.nodes();
  s.positions.resize(n, 2);
  s.velocities.resize(n, 2);
  for (Index i = 0; i < n; ++i) {
    s.positions(i, 0) = features(i, 0, 0);
    s.positions(i, 1) = features(i, 0, 1);
    s.velocities(i, 0) = features(i, 0, 2);
    s.velocities(i, 1) = features(i, 0, 3);
  }
  return s;
}

Dataset generate_dataset(const FlockConfig& cfg, const SplitCounts& counts) {
  cfg.validate();
  if (counts.train < 0 || counts.validation < 0 || counts.test < 0)
    throw std::invalid_argument("generate_dataset: counts must be >= 0");
  Dataset data;
  data.config = cfg;
  Index global = 0;
  auto make_split = [&](Index count, std::vector<TrainingExample>& out) {
    out.reserve(static_cast<std::size_t>(count));
    for (Index i = 0; i < count; ++i, ++global) {
      const std::uint64_t seed =
          derive_seed(cfg.seed, seed_stream::dataset, static_cast<std::uint64_t>(global));
      const Trajectory traj = optimal_trajectory(cfg, seed);
      TrainingExample ex;
      ex.features = trajectory_features(traj);
      ex.targets = traj.accelerations;
      ex.graphs = traj.graphs;
      ex.seed = seed;
      out.push_back(std::move(ex));
    }
  };
  make_split(counts.train, data.train);
  make_split(counts.validation, data.validation);
  make_split(counts.test, data.test);
  return data;
}

namespace {

json flock_config_to_json(const FlockConfig& cfg) {
  return json{{"agent_count", cfg.agent_count},
              {"comm_radius", cfg.comm_radius},
              {"dt", cfg.dt},
              {"horizon", cfg.horizon},
              {"max_accel", cfg.max_accel},
              {"init_position_box", cfg.init_position_box},
              {"init_velocity_range", cfg.init_velocity_range},
              {"collision_floor", cfg.collision_floor},
              {"interaction_cutoff", cfg.interaction_cutoff},
              {"seed", cfg.seed}};
}

FlockConfig flock_config_from_json(const json& j) {
  FlockConfig cfg;
  cfg.agent_count = j.at("agent_count").get<Index>();
  cfg.comm_radius = j.at("comm_radius").get<double>();
  cfg.dt = j.at("dt").get<double>();
  cfg.horizon = j.at("horizon").get<Index>();
  cfg.max_accel = j.at("max_accel").get<double>();
  cfg.init_position_box = j.at("init_position_box").get<double>();
  cfg.init_velocity_range = j.at("init_velocity_range").get<double>();
  cfg.collision_floor = j.at("collision_floor").get<double>();
  cfg.interaction_cutoff = j.at("interaction_cutoff").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  return cfg;
}

std::string example_dir_name(Index i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ex%04lld", static_cast<long long>(i));
  return buf;
}

std::string step_file_name(Index t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "step_%04lld.txt", static_cast<long long>(t));
  return buf;
}

void save_example(const TrainingExample& ex, const fs::path& dir) {
  fs::create_directories(dir / "graphs");
  save_signal(ex.features, (dir / "features.bin").string());
  save_signal(ex.targets, (dir / "targets.bin").string());
  for (Index t = 0; t < static_cast<Index>(ex.graphs.size()); ++t)
    save_graph(ex.graphs[static_cast<std::size_t>(t)],
               (dir / "graphs" / step_file_name(t)).string());
}

TrainingExample load_example(const fs::path& dir, Index steps, std::uint64_t seed) {
  TrainingExample ex;
  ex.features = load_signal((dir / "features.bin").string());
  ex.targets = load_signal((dir / "targets.bin").string());
  ex.graphs.reserve(static_cast<std::size_t>(steps));
  for (Index t = 0; t < steps; ++t)
    ex.graphs.push_back(load_graph((dir / "graphs" / step_file_name(t)).string()));
  ex.seed = seed;
  return ex;
}

}  // namespace

void save_dataset(const Dataset& data, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "stgnn-dataset-v1";
  manifest["flock_config"] = flock_config_to_json(data.config);
  const struct {
    const char* name;
    const std::vector<TrainingExample>* split;
  } splits[] = {{"train", &data.train}, {"validation", &data.validation}, {"test", &data.test}};
  for (const auto& s : splits) {
    json seeds = json::array();
    for (Index i = 0; i < static_cast<Index>(s.split->size()); ++i) {
      const TrainingExample& ex = (*s.split)[static_cast<std::size_t>(i)];
      save_example(ex, fs::path(dir) / s.name / example_dir_name(i));
      seeds.push_back(ex.seed);
    }
    manifest["seeds"][s.name] = seeds;
    manifest["counts"][s.name] = s.split->size();
  }
  std::ofstream out((fs::path(dir) / "manifest.json").string(), std::ios::trunc);
  if (!out) throw std::runtime_error("save_dataset: cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("save_dataset: manifest write failed in " + dir);
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream in((fs::path(dir) / "manifest.json").string());
  if (!in) throw std::runtime_error("load_dataset: cannot open manifest in " + dir);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw std::runtime_error("load_dataset: bad manifest in " + dir + ": " + e.what());
  }
  if (manifest.value("format", "") != "stgnn-dataset-v1")
    throw std::runtime_error("load_dataset: unsupported format tag in " + dir);
  Dataset data;
  data.config = flock_config_from_json(manifest.at("flock_config"));
  const struct {
    const char* name;
    std::vector<TrainingExample>* split;
  } splits[] = {{"train", &data.train}, {"validation", &data.validation}, {"test", &data.test}};
  for (const auto& s : splits) {
    const Index count = manifest.at("counts").at(s.name).get<Index>();
    const json& seeds = manifest.at("seeds").at(s.name);
    if (static_cast<Index>(seeds.size()) != count)
      throw std::runtime_error("load_dataset: seed list mismatch in " + dir);
    for (Index i = 0; i < count; ++i)
      s.split->push_back(load_example(fs::path(dir) / s.name / example_dir_name(i),
                                      data.config.horizon,
                                      seeds[static_cast<std::size_t>(i)].get<std::uint64_t>()));
  }
  return data;
}

Trajectory closed_loop_rollout(const Modeld& model, const FlockConfig& cfg,
                               const FlockState& initial, const RolloutOptions& opts) {
  cfg.validate();
  if (model.config.input_features != 4 || model.config.readout_features != 2)
    throw std::invalid_argument("closed_loop_rollout: model must map 4 features to 2");
  if (opts.mode != RolloutMode::TimeVarying && opts.nominal.matrix.rows() != cfg.agent_count)
    throw std::invalid_argument("closed_loop_rollout: nominal GSO size mismatch");
  const Index order = model.config.order;
  const Index window = order + 1;
  const Index n = cfg.agent_count;

  Trajectory traj;
  traj.states.reserve(static_cast<std::size_t>(cfg.horizon));
  traj.graphs.reserve(static_cast<std::size_t>(cfg.horizon));
  traj.accelerations = SpaceTimeSignald(n, cfg.horizon, 2);

  const TimeShiftOperator tso{window, TimeShiftMode::ZeroPadDelay};
  SpaceTimeSignald win(n, window, 4);  // trailing feature columns, zero-padded
  std::vector<Matrixd> gso_history;    // per-step GSOs for TimeVarying / ResSampled
  gso_history.reserve(static_cast<std::size_t>(cfg.horizon));

  FlockState state = initial;
  for (Index t = 0; t < cfg.horizon; ++t) {
    traj.states.push_back(state);
    traj.graphs.push_back(communication_graph(state, cfg.comm_radius));
    // Slide the window one step and write the newest feature column.
    for (Index f = 0; f < 4; ++f) detail::advance_once(win.slice(f), TimeShiftMode::ZeroPadDelay);
    for (Index i = 0; i < n; ++i) {
      win(i, window - 1, 0) = state.positions(i, 0);
      win(i, window - 1, 1) = state.positions(i, 1);
      win(i, window - 1, 2) = state.velocities(i, 0);
      win(i, window - 1, 3) = state.velocities(i, 1);
    }
    switch (opts.mode) {
      case RolloutMode::FixedGraph:
        break;
      case RolloutMode::TimeVarying:
        gso_history.push_back(build_gso(traj.graphs.back(), opts.gso_kind).matrix);
        break;
      case RolloutMode::ResSampled: {
        const RESConfig res{opts.res_probability,
                            derive_seed(opts.res_seed, seed_stream::res_draw,
                                        static_cast<std::uint64_t>(t))};
        gso_history.push_back(
            build_gso(res_sample(opts.nominal.source, res), opts.nominal.kind).matrix);
        break;
      }
    }
    SpaceTimeSignald pred;
    if (opts.mode == RolloutMode::FixedGraph) {
      pred = model_forward(win, model, opts.nominal.matrix, tso);
    } else {
      // Hop k reaches k-1 steps into the past: S_1 is the newest operator.
      GsoSequenceFn<double> gso_at = [&gso_history, t](Index k) -> const Matrixd& {
        const Index step = std::max<Index>(t - (k - 1), 0);
        return gso_history[static_cast<std::size_t>(step)];
      };
      pred = model_forward_with(win, model, gso_at, tso);
    }
    Matrixd u(n, 2);
    for (Index i = 0; i < n; ++i) {
      u(i, 0) = pred(i, window - 1, 0);
      u(i, 1) = pred(i, window - 1, 1);
    }
    if (!u.allFinite())
      throw DivergenceError("closed_loop_rollout: non-finite prediction at step " +
                                std::to_string(t),
                            t);
    u = clip_rows(u, cfg.max_accel);
    for (Index i = 0; i < n; ++i) {
      traj.accelerations(i, t, 0) = u(i, 0);
      traj.accelerations(i, t, 1) = u(i, 1);
    }
    if (t + 1 < cfg.horizon) state = step_dynamics(state, u, cfg.dt);
  }
  return traj;
}

}  // namespace stgnn
