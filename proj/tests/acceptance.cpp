// End-to-end acceptance checks. Each criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails. The CLI binary path is
// passed with --cli; --only <n> restricts the run to a single criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "oracles.hpp"
#include "stgnn/adam.hpp"
#include "stgnn/flocking.hpp"
#include "stgnn/frequency.hpp"
#include "stgnn/gradients.hpp"
#include "stgnn/model.hpp"
#include "stgnn/res.hpp"
#include "stgnn/rng.hpp"
#include "stgnn/stability.hpp"
#include "stgnn/training.hpp"

namespace fs = std::filesystem;
using namespace stgnn;

namespace {

std::string g_cli_path;

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

double inner(const SpaceTimeSignald& a, const SpaceTimeSignald& b) {
  double s = 0.0;
  for (Index f = 0; f < a.features(); ++f)
    s += (a.slice(f).array() * b.slice(f).array()).sum();
  return s;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(3);
  out << v;
  return out.str();
}

// ---------------------------------------------------------------------------
// 1. Filter oracle equivalence

std::string check_filter_oracles() {
  const auto start = std::chrono::steady_clock::now();
  double worst_fixed = 0.0, worst_general = 0.0;
  for (std::uint32_t trial = 0; trial < 200; ++trial) {
    std::mt19937 gen(1000 + trial);
    const Index n = 2 + static_cast<Index>(gen() % 9);        // N <= 10
    const Index horizon = 2 + static_cast<Index>(gen() % 7);  // T <= 8
    const Index order = static_cast<Index>(gen() % 5);        // K <= 4
    const TimeShiftMode mode =
        (gen() % 2 == 0) ? TimeShiftMode::Circulant : TimeShiftMode::ZeroPadDelay;
    const TimeShiftOperator tso{horizon, mode};
    const SpaceTimeSignald x = oracle::random_signal(n, horizon, 1 + gen() % 3, 2000 + trial);
    const FilterTapsd taps{oracle::random_taps(order, 3000 + trial)};

    const Matrixd s = oracle::random_symmetric(n, 4000 + trial);
    worst_fixed = std::max(worst_fixed,
                           oracle::max_abs_diff(apply_stgf(x, taps, s, tso),
                                                oracle::stgf(x, s, mode, taps.h)));

    std::vector<Matrixd> seq;
    for (Index k = 0; k < order; ++k)
      seq.push_back(oracle::random_symmetric(n, 5000 + 16 * trial + static_cast<std::uint32_t>(k)));
    worst_general = std::max(
        worst_general, oracle::max_abs_diff(apply_generalized_stgf(x, taps, seq, tso),
                                            oracle::generalized_stgf(x, seq, mode, taps.h)));

    const std::vector<Matrixd> same(static_cast<std::size_t>(order), s);
    if (oracle::max_abs_diff(apply_stgf(x, taps, s, tso),
                             apply_generalized_stgf(x, taps, same, tso)) != 0.0)
      return "identical-GSO sequence output differs from the fixed filter";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (worst_fixed > 1e-12) return "fixed-filter oracle error " + fmt(worst_fixed) + " > 1e-12";
  if (worst_general > 1e-12)
    return "generalized-filter oracle error " + fmt(worst_general) + " > 1e-12";
  if (secs > 10.0) return "runtime " + fmt(secs) + "s exceeds 10s";
  return "";
}

// ---------------------------------------------------------------------------
// 2. Spectral response scaling

std::string check_spectral_response() {
  double worst = 0.0;
  for (std::uint32_t draw = 0; draw < 50; ++draw) {
    std::mt19937 gen(6000 + draw);
    const Index n = 4 + static_cast<Index>(gen() % 7);
    const Index horizon = 8 + static_cast<Index>(gen() % 9);
    const Graph g = oracle::random_graph(n, 0.5, 6100 + draw, true);
    const GsoKind kind = (gen() % 2 == 0) ? GsoKind::Adjacency : GsoKind::Laplacian;
    const ShiftOperator s = build_gso(g, kind);
    const SpectralDecomposition eig = eigendecompose(s);
    const Index which = static_cast<Index>(gen() % static_cast<std::uint32_t>(n));
    const double lambda = eig.eigenvalues(which);
    const double omega =
        2.0 * M_PI * static_cast<double>(gen() % static_cast<std::uint32_t>(horizon)) /
        static_cast<double>(horizon);
    const FilterTapsd taps{oracle::random_taps(1 + gen() % 4, 6200 + draw)};
    const TimeShiftOperator tso{horizon, TimeShiftMode::Circulant};

    SpaceTimeSignald re(n, horizon, 1), im(n, horizon, 1);
    for (Index i = 0; i < n; ++i)
      for (Index t = 0; t < horizon; ++t) {
        re(i, t, 0) = eig.eigenvectors(i, which) * std::cos(omega * t);
        im(i, t, 0) = -eig.eigenvectors(i, which) * std::sin(omega * t);
      }
    const SpaceTimeSignald yre = apply_stgf(re, taps, s.matrix, tso);
    const SpaceTimeSignald yim = apply_stgf(im, taps, s.matrix, tso);
    FrequencyPoint pt;
    pt.lambda_vec = Vectord::Constant(taps.order(), lambda);
    pt.omega = omega;
    const std::complex<double> h = frequency_response(taps, pt);
    for (Index i = 0; i < n; ++i)
      for (Index t = 0; t < horizon; ++t) {
        const std::complex<double> in(re(i, t, 0), im(i, t, 0));
        const std::complex<double> out(yre(i, t, 0), yim(i, t, 0));
        worst = std::max(worst, std::abs(out - h * in));
      }
  }
  if (worst > 1e-10) return "spectral scaling error " + fmt(worst) + " > 1e-10";
  return "";
}

// ---------------------------------------------------------------------------
// 3. Response difference identity

std::string check_difference_identity() {
  std::mt19937 gen(7000);
  std::uniform_real_distribution<double> lam(-2.5, 2.5);
  std::uniform_real_distribution<double> om(0.0, 2.0 * M_PI);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index order = 1 + static_cast<Index>(gen() % 5);  // K <= 5
    const FilterTapsd taps{oracle::random_taps(order, 7100 + static_cast<std::uint32_t>(trial))};
    FrequencyPoint p1, p2;
    p1.lambda_vec = Vectord(order);
    p2.lambda_vec = Vectord(order);
    for (Index k = 0; k < order; ++k) {
      p1.lambda_vec(k) = lam(gen);
      p2.lambda_vec(k) = lam(gen);
    }
    p1.omega = p2.omega = om(gen);
    const Vectorcd grad = lipschitz_gradient(taps, p1, p2, p1.omega);
    std::complex<double> dot(0.0, 0.0);
    for (Index k = 0; k < order; ++k) dot += grad(k) * (p1.lambda_vec(k) - p2.lambda_vec(k));
    worst = std::max(worst, std::abs(frequency_response(taps, p1) -
                                     frequency_response(taps, p2) - dot));
  }
  if (worst > 1e-10) return "difference identity error " + fmt(worst) + " > 1e-10";
  return "";
}

// ---------------------------------------------------------------------------
// 4. Gradient checks

struct Coord {
  int block;  // 0 = layer taps, 1 = readout, 2 = input
  std::size_t a, b, c, d;
};

std::string check_gradients() {
  const Index n = 10, horizon = 8;
  ModelConfig mc;
  mc.layers = 2;
  mc.features = 8;
  mc.order = 3;
  mc.nonlinearity = Nonlinearity::Tanh;
  mc.input_features = 4;
  mc.readout_features = 2;
  const Modeld model = init_model(mc, 8000);
  const SpaceTimeSignald x = oracle::random_signal(n, horizon, 4, 8001);
  const SpaceTimeSignald target = oracle::random_signal(n, horizon, 2, 8002);
  const TimeShiftOperator tso{horizon, TimeShiftMode::ZeroPadDelay};

  // Normalize the operators to unit spectral radius. Gradient correctness is
  // a property of the code path, not of the operator scale, and an
  // unnormalized S^k drives tanh deep into saturation where finite
  // differences lose the dynamic range needed for a trustworthy comparison.
  const auto unit_radius = [](const Matrixd& s) {
    const double rho =
        Eigen::SelfAdjointEigenSolver<Matrixd>(s).eigenvalues().cwiseAbs().maxCoeff();
    return Matrixd(s / rho);
  };
  const Matrixd fixed_s = unit_radius(
      build_gso(oracle::random_graph(n, 0.5, 8003, true), GsoKind::Adjacency).matrix);
  std::vector<Matrixd> seq_s;
  for (int k = 0; k < 3; ++k)
    seq_s.push_back(unit_radius(
        build_gso(oracle::random_graph(n, 0.5, 8010 + static_cast<std::uint32_t>(k), true),
                  GsoKind::Adjacency).matrix));

  for (const bool generalized : {false, true}) {
    GsoSequenceFn<double> gso_at;
    std::function<SpaceTimeSignald(const SpaceTimeSignald&, const Modeld&)> forward;
    if (generalized) {
      gso_at = [&seq_s](Index k) -> const Matrixd& { return seq_s[static_cast<std::size_t>(k - 1)]; };
      forward = [&](const SpaceTimeSignald& in, const Modeld& m) {
        return generalized_model_forward(in, m, seq_s, tso);
      };
    } else {
      gso_at = [&fixed_s](Index) -> const Matrixd& { return fixed_s; };
      forward = [&](const SpaceTimeSignald& in, const Modeld& m) {
        return model_forward(in, m, fixed_s, tso);
      };
    }
    ForwardCache<double> cache;
    const SpaceTimeSignald pred = forward_with_cache(x, model, gso_at, tso, cache);
    const LossValue<double> lv = mse_loss(pred, target);
    const BackwardResult<double> back = model_backward(lv.grad, model, cache, gso_at, tso);

    // Enumerate blocks, then probe at least 100 coordinates of each (or the
    // whole block when it is smaller).
    std::vector<std::vector<Coord>> blocks;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      std::vector<Coord> block;
      for (std::size_t i = 0; i < model.layers[l].taps.size(); ++i)
        for (std::size_t k = 0; k < model.layers[l].taps[i].h.size(); ++k)
          block.push_back({0, l, i, k, 0});
      blocks.push_back(std::move(block));
    }
    std::vector<Coord> readout_block;
    for (Index i = 0; i < model.readout.weight.rows(); ++i) {
      for (Index j = 0; j < model.readout.weight.cols(); ++j)
        readout_block.push_back({1, static_cast<std::size_t>(i), static_cast<std::size_t>(j), 0, 0});
      readout_block.push_back({1, static_cast<std::size_t>(i), 0, 1, 0});  // bias
    }
    blocks.push_back(std::move(readout_block));
    std::vector<Coord> input_block;
    for (Index i = 0; i < n; ++i)
      for (Index t = 0; t < horizon; ++t)
        for (Index f = 0; f < 4; ++f)
          input_block.push_back({2, static_cast<std::size_t>(i), static_cast<std::size_t>(t),
                                 static_cast<std::size_t>(f), 0});
    blocks.push_back(std::move(input_block));

    std::mt19937 gen(8042);
    for (std::vector<Coord>& block : blocks) {
      std::shuffle(block.begin(), block.end(), gen);
      const std::size_t probes = std::min<std::size_t>(block.size(), 120);
      for (std::size_t idx = 0; idx < probes; ++idx) {
        const Coord& c = block[idx];
        double analytic = 0.0;
        std::function<double(double)> loss_at;
        if (c.block == 0) {
          analytic = back.grads.layers[c.a].taps[c.b].h[c.c];
          loss_at = [&, c](double v) {
            Modeld m = model;
            m.layers[c.a].taps[c.b].h[c.c] = v;
            return mse_loss(forward(x, m), target).loss;
          };
        } else if (c.block == 1) {
          const bool is_bias = c.c == 1;
          analytic = is_bias ? back.grads.readout.bias(static_cast<Index>(c.a))
                             : back.grads.readout.weight(static_cast<Index>(c.a),
                                                         static_cast<Index>(c.b));
          loss_at = [&, c, is_bias](double v) {
            Modeld m = model;
            if (is_bias)
              m.readout.bias(static_cast<Index>(c.a)) = v;
            else
              m.readout.weight(static_cast<Index>(c.a), static_cast<Index>(c.b)) = v;
            return mse_loss(forward(x, m), target).loss;
          };
        } else {
          analytic = back.input_grad(static_cast<Index>(c.a), static_cast<Index>(c.b),
                                     static_cast<Index>(c.c));
          loss_at = [&, c](double v) {
            SpaceTimeSignald perturbed = x;
            perturbed(static_cast<Index>(c.a), static_cast<Index>(c.b),
                      static_cast<Index>(c.c)) = v;
            return mse_loss(forward(perturbed, model), target).loss;
          };
        }
        double base = 0.0;
        if (c.block == 0)
          base = model.layers[c.a].taps[c.b].h[c.c];
        else if (c.block == 1)
          base = (c.c == 1) ? model.readout.bias(static_cast<Index>(c.a))
                            : model.readout.weight(static_cast<Index>(c.a),
                                                   static_cast<Index>(c.b));
        else
          base = x(static_cast<Index>(c.a), static_cast<Index>(c.b), static_cast<Index>(c.c));
        const double fd = oracle::central_difference5(loss_at, base, 1e-3);
        const double err = rel_err(analytic, fd);
        if (err > 1e-5)
          return std::string(generalized ? "generalized" : "fixed") + " path block " +
                 std::to_string(c.block) + " coord (" + std::to_string(c.a) + "," +
                 std::to_string(c.b) + "," + std::to_string(c.c) + ") analytic " +
                 fmt(analytic) + " fd " + fmt(fd) + " relative error " + fmt(err) + " > 1e-5";
      }
    }
  }
  return "";
}

// ---------------------------------------------------------------------------
// 5. Edge-sampling statistics

std::string check_res_statistics() {
  // A nominal graph with exactly 100 edges: the complete graph on 15 nodes
  // minus five fixed pairs.
  Graph g(15);
  int dropped = 0;
  for (int i = 0; i < 15; ++i)
    for (int j = i + 1; j < 15; ++j) {
      if (dropped < 5 && j == i + 1 && i % 3 == 0) {
        ++dropped;
        continue;
      }
      g.add_edge(i, j);
    }
  if (g.edge_count() != 100) return "nominal graph does not have 100 edges";
  const ShiftOperator s = build_gso(g, GsoKind::Adjacency);
  const double p = 0.8;
  const int draws = 10000;
  double total = 0.0;
  Matrixd mean = Matrixd::Zero(15, 15);
  for (int d = 0; d < draws; ++d) {
    const Graph sample = res_sample(g, RESConfig{p, derive_seed(12345, seed_stream::res_draw,
                                                                static_cast<std::uint64_t>(d))});
    total += static_cast<double>(sample.edge_count());
    mean += build_gso(sample, GsoKind::Adjacency).matrix;
  }
  const double retention = total / draws;
  const double se_count = std::sqrt(100.0 * p * (1.0 - p) / draws);
  if (std::abs(retention - 80.0) > 4.0 * se_count)
    return "mean retention " + fmt(retention) + " outside 80 +/- 4*" + fmt(se_count);
  mean /= draws;
  const double se_entry = std::sqrt(p * (1.0 - p) / draws);
  const double worst = (mean - p * s.matrix).cwiseAbs().maxCoeff();
  if (worst > 4.0 * se_entry)
    return "entrywise mean deviates " + fmt(worst) + " > 4*" + fmt(se_entry);
  return "";
}

// ---------------------------------------------------------------------------
// 6. Filter deviation trend

std::string check_filter_trend() {
  const auto start = std::chrono::steady_clock::now();
  Graph g(20);
  Rng rng(derive_seed(4242, seed_stream::grid_probe, 6));
  for (int i = 0; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j)
      if (rng.canonical() < 0.3) g.add_edge(i, j);
  const ShiftOperator s = build_gso(g, GsoKind::Adjacency);
  const FilterTapsd taps{{1.0, 0.5, 0.25, 0.125}};
  SpaceTimeSignald x(20, 8, 1);
  for (Index i = 0; i < 20; ++i)
    for (Index t = 0; t < 8; ++t) x(i, t, 0) = rng.uniform(-1.0, 1.0);
  SweepConfig cfg;
  cfg.trials = 20;
  cfg.seed = 424242;
  cfg.jobs = 2;
  const StabilityReport report = filter_deviation_experiment(taps, s, x, cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (report.fit.slope <= 0.0) return "fit slope " + fmt(report.fit.slope) + " is not positive";
  if (report.fit.r_squared < 0.9)
    return "fit R^2 " + fmt(report.fit.r_squared) + " < 0.9";
  for (const PointStats& pt : report.points) {
    if (pt.p < 0.9) continue;
    const double eps = 1.0 - pt.p;
    const double allowance = pt.bound + report.quadratic_remainder * eps * eps;
    if (pt.mean > allowance + 1e-12)
      return "p=" + fmt(pt.p) + " mean " + fmt(pt.mean) + " above bound-plus-remainder " +
             fmt(allowance);
  }
  if (secs > 120.0) return "runtime " + fmt(secs) + "s exceeds 2min";
  return "";
}

// ---------------------------------------------------------------------------
// 7/8. Trained models at desk scale
//
// Two separately trained models, matching the two execution regimes under
// test: the stability-trend model is trained on the averaged Laplacian and
// selected by closed-loop cost on that same fixed operator (the regime the
// edge-sampling experiment perturbs), while the flocking-quality model is
// trained for live time-varying graphs and selected by time-varying
// closed-loop cost.

struct TrainedBundle {
  Dataset data;
  ShiftOperator avg_gso;
  Modeld model;
};

ModelConfig desk_model_config() {
  ModelConfig mc;
  mc.layers = 1;
  mc.features = 16;
  mc.order = 3;
  mc.nonlinearity = Nonlinearity::Tanh;
  mc.input_features = 4;
  mc.readout_features = 2;
  return mc;
}

Dataset desk_dataset() {
  FlockConfig fc;
  fc.agent_count = 20;
  fc.seed = 20260814;
  return generate_dataset(fc, SplitCounts{40, 8, 8});
}

Modeld spectral_init(const ModelConfig& mc, const ShiftOperator& gso, std::uint64_t seed) {
  const SpectralDecomposition eig = eigendecompose(gso);
  const double rho = std::max(1.0, std::max(std::abs(eig.eigenvalues.minCoeff()),
                                            std::abs(eig.eigenvalues.maxCoeff())));
  return init_model(mc, seed, rho);
}

// Stability-trend bundle (criterion 7): averaged Laplacian regime.
const TrainedBundle& stability_bundle() {
  static const TrainedBundle bundle = [] {
    TrainedBundle b;
    b.data = desk_dataset();
    b.avg_gso = average_training_gso(b.data, GsoKind::Laplacian);
    TrainOptions opts;
    opts.epochs = 200;
    opts.gso_kind = GsoKind::Laplacian;
    // Select the epoch by closed-loop cost in the perturbed experiment's own
    // regime: fixed-graph rollouts on the averaged operator.
    const ShiftOperator nominal = b.avg_gso;
    const FlockConfig cfg = b.data.config;
    std::vector<FlockState> initials;
    for (const TrainingExample& ex : b.data.validation) initials.push_back(ex.initial_state());
    opts.validation_scorer = [nominal, cfg, initials](const Modeld& m) {
      double total = 0.0;
      for (const FlockState& s : initials) {
        RolloutOptions ro;
        ro.mode = RolloutMode::FixedGraph;
        ro.nominal = nominal;
        total += validation_cost(closed_loop_rollout(m, cfg, s, ro));
      }
      return total;
    };
    b.model =
        train(spectral_init(desk_model_config(), b.avg_gso, 99), b.data, b.avg_gso, opts)
            .best_model;
    return b;
  }();
  return bundle;
}

// Flocking-quality bundle (criterion 8): live time-varying graph regime.
const TrainedBundle& flocking_bundle() {
  static const TrainedBundle bundle = [] {
    TrainedBundle b;
    b.data = desk_dataset();
    b.avg_gso = average_training_gso(b.data, GsoKind::Adjacency);
    TrainOptions opts;
    opts.epochs = 30;
    opts.validation_scorer = make_validation_scorer(b.data, GsoKind::Adjacency);
    b.model =
        train(spectral_init(desk_model_config(), b.avg_gso, 99), b.data, b.avg_gso, opts)
            .best_model;
    return b;
  }();
  return bundle;
}

std::string check_network_trends() {
  const auto start = std::chrono::steady_clock::now();
  const TrainedBundle& b = stability_bundle();

  SweepConfig cfg;
  cfg.trials = 20;
  cfg.seed = 515151;
  cfg.jobs = 4;
  std::vector<SpaceTimeSignald> inputs;
  for (const TrainingExample& ex : b.data.test) inputs.push_back(ex.features);
  const StabilityReport deviation =
      gnn_output_deviation_experiment(b.model, b.avg_gso, inputs, cfg);
  if (deviation.fit.slope <= 0.0)
    return "deviation slope " + fmt(deviation.fit.slope) + " is not positive";
  if (deviation.fit.r_squared < 0.85)
    return "deviation R^2 " + fmt(deviation.fit.r_squared) + " < 0.85";

  const StabilityReport cost = gnn_relative_cost_experiment(b.model, b.avg_gso, b.data, cfg);
  // Nondecreasing in (1 - p) up to one standard error of the difference.
  for (std::size_t i = 0; i + 1 < cost.points.size(); ++i) {
    const PointStats& lo = cost.points[i];      // smaller 1-p
    const PointStats& hi = cost.points[i + 1];  // larger 1-p
    const double n_lo = static_cast<double>(cfg.trials - lo.excluded);
    const double n_hi = static_cast<double>(cfg.trials - hi.excluded);
    if (n_lo < 2 || n_hi < 2) return "too many excluded trials to compare points";
    const double se =
        std::sqrt(lo.stddev * lo.stddev / n_lo + hi.stddev * hi.stddev / n_hi);
    if (hi.mean < lo.mean - se)
      return "relative cost drops from " + fmt(lo.mean) + " (p=" + fmt(lo.p) + ") to " +
             fmt(hi.mean) + " (p=" + fmt(hi.p) + ") beyond one SE " + fmt(se);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs > 1800.0) return "runtime " + fmt(secs) + "s exceeds 30min";
  return "";
}

std::string check_flocking_quality() {
  const TrainedBundle& b = flocking_bundle();
  // Optimal-controller episodes: final cost <= 5% of initial on >= 90%.
  Index good = 0, total = 0;
  for (const auto* split : {&b.data.train, &b.data.validation, &b.data.test})
    for (const TrainingExample& ex : *split) {
      SpaceTimeSignald feat = ex.features;
      const Index last = feat.horizon() - 1;
      FlockState first, final_state;
      first.positions = Matrixd(20, 2);
      first.velocities = Matrixd(20, 2);
      final_state = first;
      for (Index i = 0; i < 20; ++i) {
        first.velocities(i, 0) = feat(i, 0, 2);
        first.velocities(i, 1) = feat(i, 0, 3);
        final_state.velocities(i, 0) = feat(i, last, 2);
        final_state.velocities(i, 1) = feat(i, last, 3);
      }
      ++total;
      if (velocity_variation(final_state) <= 0.05 * velocity_variation(first)) ++good;
    }
  if (static_cast<double>(good) < 0.9 * static_cast<double>(total))
    return "optimal rollouts hit 5% residual cost on only " + std::to_string(good) + "/" +
           std::to_string(total) + " episodes";

  // Trained model, closed loop with live graphs: >= 50% mean reduction.
  RolloutOptions opts;
  opts.mode = RolloutMode::TimeVarying;
  double ratio_sum = 0.0;
  for (const TrainingExample& ex : b.data.test) {
    const Trajectory traj = closed_loop_rollout(b.model, b.data.config, ex.initial_state(), opts);
    ratio_sum += velocity_variation(traj.states.back()) /
                 velocity_variation(traj.states.front());
  }
  const double mean_ratio = ratio_sum / static_cast<double>(b.data.test.size());
  if (mean_ratio > 0.5)
    return "trained rollouts only reduce cost to " + fmt(100.0 * mean_ratio) + "% of initial";
  return "";
}

// ---------------------------------------------------------------------------
// 9. Nonexpansive nonlinearities

std::string check_nonexpansive() {
  std::mt19937 gen(161803);
  std::uniform_real_distribution<double> dist(-100.0, 100.0);
  for (int i = 0; i < 1000000; ++i) {
    const double a = dist(gen), b = dist(gen);
    const double gap = std::abs(a - b);
    if (std::abs(std::tanh(a) - std::tanh(b)) > gap + 1e-15)
      return "tanh expanded a pair at i=" + std::to_string(i);
    const double ra = a > 0.0 ? a : 0.0;
    const double rb = b > 0.0 ? b : 0.0;
    if (std::abs(ra - rb) > gap) return "relu expanded a pair at i=" + std::to_string(i);
  }
  return "";
}

// ---------------------------------------------------------------------------
// 10. CLI determinism

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  out << content;
}

std::string check_cli_determinism() {
  if (g_cli_path.empty()) return "no --cli path given";
  const fs::path dir = fs::temp_directory_path() / "stgnn_acceptance_cli";
  fs::remove_all(dir);
  write_text(dir / "generate.json",
             "{\"seed\": 5, \"flock\": {\"agent_count\": 6, \"horizon\": 12},"
             " \"counts\": {\"train\": 3, \"validation\": 1, \"test\": 2}}");
  write_text(dir / "train.json",
             "{\"seed\": 6, \"model\": {\"features\": 4, \"order\": 2},"
             " \"train\": {\"epochs\": 3}}");
  write_text(dir / "sweep.json",
             "{\"seed\": 7, \"sweep\": {\"probabilities\": [1.0, 0.9, 0.8], \"sizes\": [6],"
             " \"trials\": 4, \"eval_examples\": 2}}");
  write_text(dir / "taps.txt", "3\n1\n0.5\n-0.25\n0.125\n");

  for (const std::string round : {std::string("a"), std::string("b")}) {
    const fs::path root = dir / round;
    if (run_cli("generate --config " + (dir / "generate.json").string() + " --out " +
                (root / "data").string()) != 0)
      return "generate failed in round " + round;
    if (run_cli("train --config " + (dir / "train.json").string() + " --dataset " +
                (root / "data").string() + " --out " + (root / "run").string()) != 0)
      return "train failed in round " + round;
    if (run_cli("rollout --dataset " + (root / "data").string() + " --checkpoint " +
                (root / "run" / "checkpoint").string() + " --out " +
                (root / "roll").string() + " --seed 8") != 0)
      return "rollout failed in round " + round;
    if (run_cli("sweep --config " + (dir / "sweep.json").string() + " --dataset " +
                (root / "data").string() + " --checkpoint " +
                (root / "run" / "checkpoint").string() + " --out " +
                (root / "sweep").string()) != 0)
      return "sweep failed in round " + round;
    if (run_cli("spectra --taps " + (dir / "taps.txt").string() + " --out " +
                (root / "spec").string()) != 0)
      return "spectra failed in round " + round;
  }

  // Every CSV produced in round a must match round b byte for byte.
  Index compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext != ".csv" && ext != ".svg") continue;
    const fs::path relative = fs::relative(entry.path(), dir / "a");
    const fs::path other = dir / "b" / relative;
    if (!fs::exists(other)) return "missing in round b: " + relative.string();
    if (slurp(entry.path()) != slurp(other))
      return "round outputs differ: " + relative.string();
    ++compared;
  }
  fs::remove_all(dir);
  if (compared < 12) return "only " + std::to_string(compared) + " outputs compared";
  return "";
}

struct Criterion {
  int id;
  std::string name;
  std::function<std::string()> run;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc)
      g_cli_path = argv[++i];
    else if (arg == "--only" && i + 1 < argc)
      only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria{
      {1, "filter oracle equivalence", check_filter_oracles},
      {2, "spectral response scaling", check_spectral_response},
      {3, "response difference identity", check_difference_identity},
      {4, "gradient checks against central differences", check_gradients},
      {5, "edge-sampling retention statistics", check_res_statistics},
      {6, "filter deviation trend and bound", check_filter_trend},
      {7, "network deviation and relative cost trends", check_network_trends},
      {8, "flocking control quality", check_flocking_quality},
      {9, "nonexpansive nonlinearities", check_nonexpansive},
      {10, "CLI determinism", check_cli_determinism},
  };

  bool all_pass = true;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
      failure = c.run();
    } catch (const std::exception& e) {
      failure = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failure.empty()) {
      std::cout << "[PASS] " << c.id << ". " << c.name << " (" << fmt(secs) << "s)\n";
    } else {
      std::cout << "[FAIL] " << c.id << ". " << c.name << ": " << failure << " (" << fmt(secs)
                << "s)\n";
      all_pass = false;
    }
    std::cout.flush();
  }
  return all_pass ? 0 : 1;
}
