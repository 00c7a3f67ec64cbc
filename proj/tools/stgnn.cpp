// Command-line pipelines: dataset generation, imitation training, closed-loop
// rollout, RES stability sweeps, and filter spectra reports.
//
// Every command reads one JSON config file; --seed/--out/--jobs and the
// path flags override config values. Unknown config keys are hard errors.
// A run manifest is written into the output directory before any long
// computation starts.
//
// Exit codes: 0 success, 2 config error, 3 numeric divergence, 4 I/O error.
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stgnn/errors.hpp"
#include "stgnn/flocking.hpp"
#include "stgnn/frequency.hpp"
#include "stgnn/model.hpp"
#include "stgnn/rng.hpp"
#include "stgnn/stability.hpp"
#include "stgnn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stgnn;

namespace {

constexpr const char* kToolVersion = "stgnn 1.0.0";

// ---------------------------------------------------------------------------
// Config plumbing

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");
  return j;
}

void reject_unknown_keys(const json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known)
      throw std::invalid_argument("config: unknown key \"" + item.key() + "\" in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad value for \"") + key + "\": " + e.what());
  }
}

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string dataset;
  std::string checkpoint;
  std::string taps;
};

struct Resolved {
  json config;  // full config snapshot after overrides
  std::string out;
  std::uint64_t seed = 0;
  Index jobs = 1;
};

Resolved resolve_common(const CommonArgs& args, json cfg) {
  Resolved r;
  if (args.seed) cfg["seed"] = *args.seed;
  if (args.jobs) cfg["jobs"] = *args.jobs;
  if (!args.out.empty()) cfg["out"] = args.out;
  if (!args.dataset.empty()) cfg["dataset"] = args.dataset;
  if (!args.checkpoint.empty()) cfg["checkpoint"] = args.checkpoint;
  if (!args.taps.empty()) cfg["taps"] = args.taps;
  r.seed = get_or<std::uint64_t>(cfg, "seed", 0);
  r.jobs = get_or<Index>(cfg, "jobs", 1);
  r.out = get_or<std::string>(cfg, "out", "");
  if (r.out.empty()) throw std::invalid_argument("config: an output directory is required "
                                                 "(\"out\" key or --out)");
  if (r.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
  r.config = std::move(cfg);
  return r;
}

void write_run_manifest(const Resolved& r, const std::string& command,
                        const std::vector<std::string>& artifacts) {
  fs::create_directories(r.out);
  json manifest;
  manifest["command"] = command;
  manifest["config"] = r.config;
  manifest["seed"] = r.seed;
  manifest["artifacts"] = artifacts;
  manifest["tool_version"] = kToolVersion;
  std::ofstream out((fs::path(r.out) / "run_manifest.json").string(), std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write run manifest in " + r.out);
  out << manifest.dump(2) << "\n";
  if (!out) throw std::runtime_error("run manifest write failed in " + r.out);
}

FlockConfig flock_from_config(const json& section, std::uint64_t seed) {
  reject_unknown_keys(section, "flock",
                      {"agent_count", "comm_radius", "dt", "horizon", "max_accel",
                       "init_position_box", "init_velocity_range", "collision_floor",
                       "interaction_cutoff"});
  FlockConfig fc;
  fc.agent_count = get_or<Index>(section, "agent_count", fc.agent_count);
  fc.comm_radius = get_or<double>(section, "comm_radius", fc.comm_radius);
  fc.dt = get_or<double>(section, "dt", fc.dt);
  fc.horizon = get_or<Index>(section, "horizon", fc.horizon);
  fc.max_accel = get_or<double>(section, "max_accel", fc.max_accel);
  fc.init_position_box = get_or<double>(section, "init_position_box", fc.init_position_box);
  fc.init_velocity_range = get_or<double>(section, "init_velocity_range", fc.init_velocity_range);
  fc.collision_floor = get_or<double>(section, "collision_floor", fc.collision_floor);
  fc.interaction_cutoff = get_or<double>(section, "interaction_cutoff", fc.interaction_cutoff);
  fc.seed = seed;
  fc.validate();
  return fc;
}

SweepConfig sweep_from_config(const json& section, std::uint64_t seed, Index jobs) {
  reject_unknown_keys(section, "sweep",
                      {"probabilities", "sizes", "trials", "experiments", "filter_order",
                       "eval_examples"});
  SweepConfig sc;
  if (section.contains("probabilities"))
    sc.probabilities = section.at("probabilities").get<std::vector<double>>();
  if (section.contains("sizes")) sc.sizes = section.at("sizes").get<std::vector<Index>>();
  sc.trials = get_or<Index>(section, "trials", sc.trials);
  sc.seed = seed;
  sc.jobs = jobs;
  sc.validate();
  return sc;
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  reject_unknown_keys(cfg, "top level", {"seed", "out", "jobs", "flock", "counts"});
  const Resolved r = resolve_common(args, std::move(cfg));
  const FlockConfig fc = flock_from_config(r.config.value("flock", json::object()), r.seed);
  const json counts_cfg = r.config.value("counts", json::object());
  reject_unknown_keys(counts_cfg, "counts", {"train", "validation", "test"});
  SplitCounts counts;
  counts.train = get_or<Index>(counts_cfg, "train", counts.train);
  counts.validation = get_or<Index>(counts_cfg, "validation", counts.validation);
  counts.test = get_or<Index>(counts_cfg, "test", counts.test);

  write_run_manifest(r, "generate", {"manifest.json", "train/", "validation/", "test/"});
  const Dataset data = generate_dataset(fc, counts);
  save_dataset(data, r.out);
  std::cout << "generated " << data.train.size() << "/" << data.validation.size() << "/"
            << data.test.size() << " examples in " << r.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  reject_unknown_keys(cfg, "top level", {"seed", "out", "jobs", "dataset", "model", "train"});
  const Resolved r = resolve_common(args, std::move(cfg));
  const std::string dataset_dir = get_or<std::string>(r.config, "dataset", "");
  if (dataset_dir.empty())
    throw std::invalid_argument("config: train needs a dataset path (\"dataset\" or --dataset)");

  const json model_cfg = r.config.value("model", json::object());
  reject_unknown_keys(model_cfg, "model",
                      {"layers", "features", "order", "nonlinearity", "input_features",
                       "readout_features"});
  ModelConfig mc;
  mc.layers = get_or<Index>(model_cfg, "layers", 1);
  mc.features = get_or<Index>(model_cfg, "features", 16);
  mc.order = get_or<Index>(model_cfg, "order", 3);
  mc.nonlinearity =
      nonlinearity_from_string(get_or<std::string>(model_cfg, "nonlinearity", "tanh"));
  mc.input_features = get_or<Index>(model_cfg, "input_features", 4);
  mc.readout_features = get_or<Index>(model_cfg, "readout_features", 2);
  mc.validate();

  const json train_cfg = r.config.value("train", json::object());
  reject_unknown_keys(train_cfg, "train",
                      {"epochs", "learning_rate", "beta1", "beta2", "epsilon", "graph_mode",
                       "gso_kind", "init_spectral_scaling"});
  TrainOptions opts;
  opts.epochs = get_or<Index>(train_cfg, "epochs", 30);
  opts.adam.learning_rate = get_or<double>(train_cfg, "learning_rate", opts.adam.learning_rate);
  opts.adam.beta1 = get_or<double>(train_cfg, "beta1", opts.adam.beta1);
  opts.adam.beta2 = get_or<double>(train_cfg, "beta2", opts.adam.beta2);
  opts.adam.epsilon = get_or<double>(train_cfg, "epsilon", opts.adam.epsilon);
  const std::string mode = get_or<std::string>(train_cfg, "graph_mode", "average");
  if (mode == "average")
    opts.graph_mode = GraphMode::AverageGso;
  else if (mode == "time_varying")
    opts.graph_mode = GraphMode::TimeVarying;
  else
    throw std::invalid_argument("config: graph_mode must be \"average\" or \"time_varying\"");
  opts.gso_kind = gso_kind_from_string(get_or<std::string>(train_cfg, "gso_kind", "adjacency"));
  const bool spectral_scaling = get_or<bool>(train_cfg, "init_spectral_scaling", true);

  write_run_manifest(r, "train", {"checkpoint/", "loss.csv"});

  const Dataset data = load_dataset(dataset_dir);
  const ShiftOperator avg = average_training_gso(data, opts.gso_kind);
  // Scale tap initialization down by the averaged GSO's spectral radius so
  // deep diffusions start at comparable magnitude instead of saturating tanh.
  double rho = 1.0;
  if (spectral_scaling) {
    const SpectralDecomposition eig = eigendecompose(avg);
    rho = std::max(1.0, std::max(std::abs(eig.eigenvalues.minCoeff()),
                                 std::abs(eig.eigenvalues.maxCoeff())));
  }
  const Modeld initial = init_model(mc, r.seed, rho);
  if (!data.validation.empty()) opts.validation_scorer = make_validation_scorer(data, opts.gso_kind);

  const TrainResult result = train(initial, data, avg, opts);
  save_loss_report(result.report, (fs::path(r.out) / "loss.csv").string());
  Checkpoint ckpt{result.best_model, avg.source, opts.gso_kind};
  save_checkpoint(ckpt, (fs::path(r.out) / "checkpoint").string());
  std::cout << "best epoch " << result.report.best_epoch << ", checkpoint in " << r.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rollout

int cmd_rollout(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  reject_unknown_keys(cfg, "top level",
                      {"seed", "out", "jobs", "dataset", "checkpoint", "rollout"});
  const Resolved r = resolve_common(args, std::move(cfg));
  const std::string dataset_dir = get_or<std::string>(r.config, "dataset", "");
  const std::string ckpt_dir = get_or<std::string>(r.config, "checkpoint", "");
  if (dataset_dir.empty() || ckpt_dir.empty())
    throw std::invalid_argument("config: rollout needs dataset and checkpoint paths");

  const json ro_cfg = r.config.value("rollout", json::object());
  reject_unknown_keys(ro_cfg, "rollout", {"episodes", "mode", "res_probability", "source"});
  const Index episodes = get_or<Index>(ro_cfg, "episodes", 8);
  const std::string mode = get_or<std::string>(ro_cfg, "mode", "time_varying");
  const double res_p = get_or<double>(ro_cfg, "res_probability", 1.0);
  const std::string source = get_or<std::string>(ro_cfg, "source", "test");
  if (episodes < 1) throw std::invalid_argument("config: episodes must be >= 1");
  if (source != "test" && source != "fresh")
    throw std::invalid_argument("config: rollout source must be \"test\" or \"fresh\"");

  write_run_manifest(r, "rollout", {"rollout.csv"});

  const Checkpoint ckpt = load_checkpoint(ckpt_dir);
  const Dataset data = load_dataset(dataset_dir);
  RolloutOptions opts;
  opts.gso_kind = ckpt.gso_kind;
  if (mode == "time_varying") {
    opts.mode = RolloutMode::TimeVarying;
  } else if (mode == "fixed") {
    opts.mode = RolloutMode::FixedGraph;
    opts.nominal = build_gso(ckpt.average_graph, ckpt.gso_kind);
  } else if (mode == "res") {
    opts.mode = RolloutMode::ResSampled;
    opts.nominal = build_gso(ckpt.average_graph, ckpt.gso_kind);
    opts.res_probability = res_p;
  } else {
    throw std::invalid_argument("config: rollout mode must be time_varying, fixed, or res");
  }

  std::ofstream csv((fs::path(r.out) / "rollout.csv").string(), std::ios::trunc);
  if (!csv) throw std::runtime_error("cannot open rollout.csv in " + r.out);
  csv << "episode,seed,initial_cost,final_cost,cost,optimal_cost\n";
  char buf[256];
  for (Index e = 0; e < episodes; ++e) {
    FlockState initial;
    std::uint64_t ep_seed;
    if (source == "test") {
      if (data.test.empty()) throw std::runtime_error("rollout: dataset has no test split");
      const TrainingExample& ex = data.test[static_cast<std::size_t>(e) % data.test.size()];
      initial = ex.initial_state();
      ep_seed = ex.seed;
    } else {
      ep_seed = derive_seed(r.seed, seed_stream::rollout_step, static_cast<std::uint64_t>(e));
      initial = sample_initial_state(data.config, ep_seed);
    }
    opts.res_seed = derive_seed(ep_seed, seed_stream::res_draw, 0);
    const Trajectory traj = closed_loop_rollout(ckpt.model, data.config, initial, opts);
    const Trajectory optimal = policy_rollout(
        [&data](const FlockState& s) { return optimal_controller(s, data.config, true); },
        data.config, initial);
    std::snprintf(buf, sizeof(buf), "%lld,%llu,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(e), static_cast<unsigned long long>(ep_seed),
                  velocity_variation(traj.states.front()), velocity_variation(traj.states.back()),
                  validation_cost(traj), validation_cost(optimal));
    csv << buf;
  }
  if (!csv) throw std::runtime_error("rollout.csv write failed in " + r.out);
  std::cout << "rolled out " << episodes << " episodes into " << r.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

ShiftOperator average_gso_of_examples(const std::vector<TrainingExample>& examples,
                                      GsoKind kind) {
  std::vector<ShiftOperator> gsos;
  for (const TrainingExample& ex : examples)
    for (const Graph& g : ex.graphs) gsos.push_back(build_gso(g, kind));
  if (gsos.empty()) throw std::runtime_error("sweep: no graphs to average");
  return average_gso(gsos);
}

int cmd_sweep(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  reject_unknown_keys(cfg, "top level",
                      {"seed", "out", "jobs", "dataset", "checkpoint", "sweep"});
  const Resolved r = resolve_common(args, std::move(cfg));
  const std::string dataset_dir = get_or<std::string>(r.config, "dataset", "");
  const std::string ckpt_dir = get_or<std::string>(r.config, "checkpoint", "");
  if (dataset_dir.empty() || ckpt_dir.empty())
    throw std::invalid_argument("config: sweep needs dataset and checkpoint paths");

  const json sweep_cfg = r.config.value("sweep", json::object());
  SweepConfig sc = sweep_from_config(sweep_cfg, r.seed, r.jobs);
  std::vector<std::string> experiments =
      get_or<std::vector<std::string>>(sweep_cfg, "experiments",
                                       {"filter", "gnn_deviation", "relative_cost"});
  for (const std::string& e : experiments)
    if (e != "filter" && e != "gnn_deviation" && e != "relative_cost")
      throw std::invalid_argument("config: unknown experiment \"" + e + "\"");
  const Index filter_order = get_or<Index>(sweep_cfg, "filter_order", 3);
  const Index eval_examples = get_or<Index>(sweep_cfg, "eval_examples", 8);
  if (filter_order < 0 || eval_examples < 1)
    throw std::invalid_argument("config: bad filter_order or eval_examples");

  std::vector<std::string> artifacts;
  for (Index n : sc.sizes)
    for (const std::string& e : experiments) {
      artifacts.push_back(e + "_detail_N" + std::to_string(n) + ".csv");
      artifacts.push_back(e + "_summary_N" + std::to_string(n) + ".csv");
      artifacts.push_back(e + "_N" + std::to_string(n) + ".svg");
    }
  write_run_manifest(r, "sweep", artifacts);

  const Checkpoint ckpt = load_checkpoint(ckpt_dir);
  const Dataset data = load_dataset(dataset_dir);

  for (Index n : sc.sizes) {
    SweepConfig per_size = sc;
    per_size.seed = derive_seed(r.seed, seed_stream::sweep_size, static_cast<std::uint64_t>(n));

    // Evaluation pool and nominal GSO for this size. The checkpoint's own
    // size reuses the dataset and the averaged training graph; other sizes
    // get freshly generated optimal episodes.
    Dataset eval_data;
    ShiftOperator nominal;
    if (n == data.config.agent_count) {
      eval_data = data;
      nominal = build_gso(ckpt.average_graph, ckpt.gso_kind);
    } else {
      FlockConfig fc = data.config;
      fc.agent_count = n;
      fc.init_position_box = 0.0;  // rescale the box with sqrt(N)
      fc.seed = per_size.seed;
      eval_data = generate_dataset(fc, SplitCounts{0, 0, eval_examples});
      nominal = average_gso_of_examples(eval_data.test, ckpt.gso_kind);
    }

    for (const std::string& experiment : experiments) {
      StabilityReport report;
      if (experiment == "filter") {
        Rng rng(derive_seed(per_size.seed, seed_stream::grid_probe, 1));
        FilterTapsd taps;
        taps.h.resize(static_cast<std::size_t>(filter_order) + 1);
        for (double& h : taps.h) h = rng.uniform(-1.0, 1.0);
        SpaceTimeSignald x(n, 8, 1);
        for (Index i = 0; i < n; ++i)
          for (Index t = 0; t < 8; ++t) x(i, t, 0) = rng.uniform(-1.0, 1.0);
        report = filter_deviation_experiment(taps, nominal, x, per_size);
      } else if (experiment == "gnn_deviation") {
        std::vector<SpaceTimeSignald> inputs;
        const auto& pool = eval_data.test.empty() ? eval_data.validation : eval_data.test;
        for (std::size_t i = 0; i < pool.size() && i < static_cast<std::size_t>(eval_examples);
             ++i)
          inputs.push_back(pool[i].features);
        report = gnn_output_deviation_experiment(ckpt.model, nominal, inputs, per_size);
      } else {
        report = gnn_relative_cost_experiment(ckpt.model, nominal, eval_data, per_size);
      }
      const std::string base = experiment + "_";
      const std::string suffix = "_N" + std::to_string(n);
      save_detail_csv(report, (fs::path(r.out) / (base + "detail" + suffix + ".csv")).string());
      save_summary_csv(report, (fs::path(r.out) / (base + "summary" + suffix + ".csv")).string());
      save_report_svg(report, experiment + " vs edge-drop, N=" + std::to_string(n),
                      (fs::path(r.out) / (experiment + suffix + ".svg")).string());
    }
  }
  std::cout << "sweep reports written to " << r.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// spectra

int cmd_spectra(const CommonArgs& args) {
  json cfg = load_config(args.config_path);
  reject_unknown_keys(cfg, "top level",
                      {"seed", "out", "jobs", "taps", "checkpoint", "spectra"});
  const Resolved r = resolve_common(args, std::move(cfg));
  const std::string taps_path = get_or<std::string>(r.config, "taps", "");
  const std::string ckpt_dir = get_or<std::string>(r.config, "checkpoint", "");
  if (taps_path.empty() == ckpt_dir.empty())
    throw std::invalid_argument("config: spectra needs exactly one of taps or checkpoint");

  const json sp_cfg = r.config.value("spectra", json::object());
  reject_unknown_keys(sp_cfg, "spectra",
                      {"lambda_min", "lambda_max", "omega_samples", "lambda_samples",
                       "grid_points"});
  const Index omega_samples = get_or<Index>(sp_cfg, "omega_samples", 64);
  const Index lambda_samples = get_or<Index>(sp_cfg, "lambda_samples", 64);
  const Index grid_points = get_or<Index>(sp_cfg, "grid_points", 33);
  if (grid_points < 2) throw std::invalid_argument("config: grid_points must be >= 2");

  write_run_manifest(r, "spectra", {"report.csv", "grid.csv"});

  std::vector<FilterTapsd> filters;
  Interval range{-1.0, 1.0};
  std::string source_name;
  if (!taps_path.empty()) {
    filters.push_back(load_taps(taps_path));
    source_name = taps_path;
  } else {
    const Checkpoint ckpt = load_checkpoint(ckpt_dir);
    for (const LayerParams<double>& layer : ckpt.model.layers)
      for (const FilterTapsd& taps : layer.taps) filters.push_back(taps);
    const SpectralDecomposition eig = eigendecompose(build_gso(ckpt.average_graph, ckpt.gso_kind));
    range = {eig.eigenvalues.minCoeff(), eig.eigenvalues.maxCoeff()};
    source_name = ckpt_dir;
  }
  if (sp_cfg.contains("lambda_min")) range.lo = sp_cfg.at("lambda_min").get<double>();
  if (sp_cfg.contains("lambda_max")) range.hi = sp_cfg.at("lambda_max").get<double>();

  double best_c_l = 0.0;
  double best_norm = 0.0;
  std::string grid_spec = "constant filter: response has no lambda dependence";
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    const LipschitzEstimate est = estimate_c_l(filters[i], range, omega_samples, lambda_samples);
    if (est.c_l >= best_c_l) {
      if (est.c_l > best_c_l) argmax = i;
      best_c_l = std::max(best_c_l, est.c_l);
      grid_spec = est.grid_spec;
    }
    best_norm = std::max(best_norm, filter_norm(filters[i], range, omega_samples, lambda_samples));
  }

  {
    std::ofstream out((fs::path(r.out) / "report.csv").string(), std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open report.csv in " + r.out);
    char buf[128];
    out << "source,filters,c_l,filter_norm,lambda_lo,lambda_hi,grid_spec\n";
    std::snprintf(buf, sizeof(buf), ",%zu,%.17g,%.17g,%.17g,%.17g,", filters.size(), best_c_l,
                  best_norm, range.lo, range.hi);
    out << source_name << buf << '"' << grid_spec << '"' << "\n";
    if (!out) throw std::runtime_error("report.csv write failed in " + r.out);
  }
  {
    // Response of the worst-case filter along the diagonal lambda line.
    const FilterTapsd& taps = filters[argmax];
    std::ofstream out((fs::path(r.out) / "grid.csv").string(), std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open grid.csv in " + r.out);
    out << "lambda,omega,real,imag,abs\n";
    char buf[256];
    for (Index li = 0; li < grid_points; ++li) {
      const double lambda =
          range.lo + (range.hi - range.lo) * static_cast<double>(li) /
                         static_cast<double>(grid_points - 1);
      for (Index oi = 0; oi < grid_points; ++oi) {
        const double omega =
            2.0 * 3.14159265358979323846 * static_cast<double>(oi) / static_cast<double>(grid_points);
        FrequencyPoint pt;
        pt.lambda_vec = Vectord::Constant(taps.order(), lambda);
        pt.omega = omega;
        const std::complex<double> resp = frequency_response(taps, pt);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", lambda, omega,
                      resp.real(), resp.imag(), std::abs(resp));
        out << buf;
      }
    }
    if (!out) throw std::runtime_error("grid.csv write failed in " + r.out);
  }
  std::cout << "spectra report written to " << r.out << " (C_L = " << best_c_l << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time graph filter and GNN experiment pipelines"};
  app.require_subcommand(1);
  CommonArgs args;
  app.add_option("--config", args.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", args.seed, "root RNG seed (overrides config)");
  app.add_option("--out", args.out, "output directory (overrides config)");
  app.add_option("--jobs", args.jobs, "worker thread bound (overrides config)");
  app.add_option("--dataset", args.dataset, "dataset directory (overrides config)");
  app.add_option("--checkpoint", args.checkpoint, "checkpoint directory (overrides config)");
  app.add_option("--taps", args.taps, "filter taps file (overrides config)");
  app.fallthrough();

  CLI::App* c_generate = app.add_subcommand("generate", "generate a flocking dataset");
  CLI::App* c_train = app.add_subcommand("train", "train an imitation model");
  CLI::App* c_rollout = app.add_subcommand("rollout", "closed-loop rollouts of a checkpoint");
  CLI::App* c_sweep = app.add_subcommand("sweep", "RES stability sweep");
  CLI::App* c_spectra = app.add_subcommand("spectra", "Lipschitz and frequency-response report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (c_generate->parsed()) return cmd_generate(args);
    if (c_train->parsed()) return cmd_train(args);
    if (c_rollout->parsed()) return cmd_rollout(args);
    if (c_sweep->parsed()) return cmd_sweep(args);
    if (c_spectra->parsed()) return cmd_spectra(args);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
