// Imitation-learning loop: open-loop MSE training on recorded optimal
// trajectories (teacher forcing), closed-loop validation scoring, model
// selection by mean validation cost.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stgnn/adam.hpp"
#include "stgnn/flocking.hpp"
#include "stgnn/gradients.hpp"
#include "stgnn/model.hpp"
#include "stgnn/shift.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

// AverageGso trains every example against one fixed averaged GSO over the
// full horizon. TimeVarying trains on sliding windows of length K+1 with the
// live per-step graph sequence of the example (loss on the newest column),
// matching what the policy sees at execution time.
enum class GraphMode { AverageGso, TimeVarying };

struct TrainOptions {
  Index epochs = 30;
  AdamConfig adam;
  GraphMode graph_mode = GraphMode::AverageGso;
  TimeShiftMode tso_mode = TimeShiftMode::ZeroPadDelay;
  GsoKind gso_kind = GsoKind::Adjacency;
  // Scores a candidate model after each epoch (lower is better); when empty,
  // the open-loop MSE on the validation split is used instead.
  std::function<double(const Modeld&)> validation_scorer;
};

struct EpochRecord {
  Index epoch = 0;          // 1-based
  double train_mse = 0.0;   // mean over examples
  double validation_cost = 0.0;
  bool selected = false;    // best checkpoint so far at this epoch
};

struct LossReport {
  std::vector<EpochRecord> epochs;
  Index best_epoch = 0;  // 0 when epochs == 0 (initial model returned)
};

struct TrainResult {
  Modeld best_model;
  LossReport report;
};

// Averaged GSO over every per-step communication graph of the train split.
ShiftOperator average_training_gso(const Dataset& data, GsoKind kind);

// One optimizer step per example (full-trajectory batch of one), fixed
// example order; throws DivergenceError when the loss turns non-finite.
TrainResult train(const Modeld& initial, const Dataset& data, const ShiftOperator& avg_gso,
                  const TrainOptions& opts);

// CSV schema: epoch,train_mse,validation_cost,selected_flag
void save_loss_report(const LossReport& report, const std::string& path);

// Mean closed-loop validation_cost over the validation split, rolling out
// with live communication graphs.
std::function<double(const Modeld&)> make_validation_scorer(const Dataset& data, GsoKind kind);

}  // namespace stgnn
