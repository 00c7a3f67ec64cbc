#include "stgnn/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "stgnn/errors.hpp"

namespace stgnn {

ShiftOperator average_training_gso(const Dataset& data, GsoKind kind) {
  std::vector<ShiftOperator> gsos;
  for (const TrainingExample& ex : data.train)
    for (const Graph& g : ex.graphs) gsos.push_back(build_gso(g, kind));
  if (gsos.empty()) throw std::invalid_argument("average_training_gso: empty train split");
  return average_gso(gsos);
}

namespace {

// Open-loop full-horizon pass against one fixed GSO; returns the loss and
// accumulates gradients via one backward pass.
double example_pass_fixed(const Modeld& model, const TrainingExample& ex, const Matrixd& gso,
                          const TimeShiftOperator& tso, ModelGrads<double>* grads) {
  GsoSequenceFn<double> gso_at = [&gso](Index) -> const Matrixd& { return gso; };
  ForwardCache<double> cache;
  const SpaceTimeSignald pred = forward_with_cache(ex.features, model, gso_at, tso, cache);
  const LossValue<double> loss = mse_loss(pred, ex.targets);
  if (grads) {
    const BackwardResult<double> back = model_backward(loss.grad, model, cache, gso_at, tso);
    for_each_param_pair(*grads, back.grads, [](double& acc, const double& g) { acc += g; });
  }
  return loss.loss;
}

// Sliding-window pass with the live graph sequence: the window ending at t
// uses hop-k operator from step t-k+1, mirroring closed_loop_rollout, and the
// loss is taken on the newest column only.
double example_pass_windows(const Modeld& model, const TrainingExample& ex,
                            const std::vector<Matrixd>& step_gsos, const TimeShiftOperator& tso,
                            ModelGrads<double>* grads) {
  const Index horizon = ex.features.horizon();
  const Index order = model.config.order;
  const Index window = order + 1;
  const Index n = ex.features.nodes();
  double loss_sum = 0.0;
  SpaceTimeSignald win(n, window, ex.features.features());
  for (Index t = 0; t < horizon; ++t) {
    for (Index f = 0; f < win.features(); ++f) {
      detail::advance_once(win.slice(f), TimeShiftMode::ZeroPadDelay);
      win.slice(f).col(window - 1) = ex.features.slice(f).col(t);
    }
    GsoSequenceFn<double> gso_at = [&step_gsos, t](Index k) -> const Matrixd& {
      const Index step = std::max<Index>(t - (k - 1), 0);
      return step_gsos[static_cast<std::size_t>(step)];
    };
    ForwardCache<double> cache;
    const SpaceTimeSignald pred = forward_with_cache(win, model, gso_at, tso, cache);
    // Column-masked MSE: only the newest column carries a target.
    SpaceTimeSignald up(n, window, 2);
    const double count = static_cast<double>(n * 2 * horizon);
    double local = 0.0;
    for (Index f = 0; f < 2; ++f)
      for (Index i = 0; i < n; ++i) {
        const double diff = pred(i, window - 1, f) - ex.targets(i, t, f);
        local += diff * diff;
        up(i, window - 1, f) = 2.0 * diff / count;
      }
    loss_sum += local / count;
    if (grads) {
      const BackwardResult<double> back = model_backward(up, model, cache, gso_at, tso);
      for_each_param_pair(*grads, back.grads, [](double& acc, const double& g) { acc += g; });
    }
  }
  return loss_sum;
}

double example_loss(const Modeld& model, const TrainingExample& ex, const ShiftOperator& avg_gso,
                    const TrainOptions& opts, ModelGrads<double>* grads,
                    std::vector<Matrixd>* gso_scratch) {
  const TimeShiftOperator tso_full{ex.features.horizon(), opts.tso_mode};
  if (opts.graph_mode == GraphMode::AverageGso)
    return example_pass_fixed(model, ex, avg_gso.matrix, tso_full, grads);
  gso_scratch->clear();
  for (const Graph& g : ex.graphs) gso_scratch->push_back(build_gso(g, opts.gso_kind).matrix);
  const TimeShiftOperator tso_win{model.config.order + 1, TimeShiftMode::ZeroPadDelay};
  return example_pass_windows(model, ex, *gso_scratch, tso_win, grads);
}

}  // namespace

TrainResult train(const Modeld& initial, const Dataset& data, const ShiftOperator& avg_gso,
                  const TrainOptions& opts) {
  if (data.train.empty()) throw std::invalid_argument("train: empty train split");
  if (opts.epochs < 0) throw std::invalid_argument("train: epochs must be >= 0");
  initial.config.validate();
  TrainResult result;
  result.best_model = initial;
  if (opts.epochs == 0) return result;

  Modeld model = initial;
  AdamState<double> adam(model, opts.adam);
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<Matrixd> gso_scratch;

  for (Index epoch = 1; epoch <= opts.epochs; ++epoch) {
    double mse_sum = 0.0;
    for (const TrainingExample& ex : data.train) {
      ModelGrads<double> grads = zero_grads_like(model);
      const double loss = example_loss(model, ex, avg_gso, opts, &grads, &gso_scratch);
      if (!std::isfinite(loss))
        throw DivergenceError("train: non-finite loss at epoch " + std::to_string(epoch), epoch);
      mse_sum += loss;
      adam_step(model, grads, adam);
    }
    const double train_mse = mse_sum / static_cast<double>(data.train.size());

    double val_cost;
    if (opts.validation_scorer) {
      val_cost = opts.validation_scorer(model);
    } else {
      double sum = 0.0;
      for (const TrainingExample& ex : data.validation)
        sum += example_loss(model, ex, avg_gso, opts, nullptr, &gso_scratch);
      val_cost = data.validation.empty() ? train_mse
                                         : sum / static_cast<double>(data.validation.size());
    }
    if (!std::isfinite(val_cost))
      throw DivergenceError("train: non-finite validation cost at epoch " + std::to_string(epoch),
                            epoch);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_mse = train_mse;
    rec.validation_cost = val_cost;
    if (val_cost < best_cost) {  // strict: ties keep the earliest epoch
      best_cost = val_cost;
      result.best_model = model;
      result.report.best_epoch = epoch;
    }
    result.report.epochs.push_back(rec);
  }
  if (result.report.best_epoch > 0)
    result.report.epochs[static_cast<std::size_t>(result.report.best_epoch - 1)].selected = true;
  return result;
}

void save_loss_report(const LossReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_loss_report: cannot open " + path);
  out << "epoch,train_mse,validation_cost,selected_flag\n";
  char buf[128];
  for (const EpochRecord& rec : report.epochs) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%d\n", static_cast<long long>(rec.epoch),
                  rec.train_mse, rec.validation_cost, rec.selected ? 1 : 0);
    out << buf;
  }
  if (!out) throw std::runtime_error("save_loss_report: write failed for " + path);
}

std::function<double(const Modeld&)> make_validation_scorer(const Dataset& data, GsoKind kind) {
  if (data.validation.empty())
    throw std::invalid_argument("make_validation_scorer: empty validation split");
  const FlockConfig cfg = data.config;
  std::vector<FlockState> initials;
  for (const TrainingExample& ex : data.validation) initials.push_back(ex.initial_state());
  return [cfg, kind, initials](const Modeld& model) {
    RolloutOptions opts;
    opts.mode = RolloutMode::TimeVarying;
    opts.gso_kind = kind;
    double sum = 0.0;
    for (const FlockState& s : initials)
      sum += validation_cost(closed_loop_rollout(model, cfg, s, opts));
    return sum / static_cast<double>(initials.size());
  };
}

}  // namespace stgnn
