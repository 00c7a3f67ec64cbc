// Stability experiments: how much do filter and network outputs move when
// the graph is resampled edge-wise with keep probability p, and how does the
// measured deviation compare to the first-order theoretical bound
//
//   E ||Y~ - Y||_F^2 <= C (1 - p) ||X||_F^2
//
// with C = alpha N C_L^2 for a single filter and
// C = alpha N L^2 C_L^2 C_sigma^{2L} F^{2L} for an L-layer network.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stgnn/filter.hpp"
#include "stgnn/flocking.hpp"
#include "stgnn/frequency.hpp"
#include "stgnn/model.hpp"
#include "stgnn/shift.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

struct SweepConfig {
  std::vector<double> probabilities = {1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7};
  std::vector<Index> sizes = {20, 50, 80};  // consumed by the CLI driver
  Index trials = 20;
  std::uint64_t seed = 0;
  Index jobs = 1;

  void validate() const;
};

struct TrialRow {
  Index n = 0;
  double p = 1.0;
  Index trial = 0;
  double measured = 0.0;       // deviation or absolute perturbed cost
  double relative = 0.0;       // relative cost; meaningful iff has_relative
  bool has_relative = false;
  double bound = 0.0;
  std::uint64_t seed = 0;
};

struct PointStats {
  Index n = 0;
  double p = 1.0;
  double mean = 0.0;    // of measured, or of relative cost when present
  double stddev = 0.0;  // sample standard deviation
  double bound = 0.0;   // mean theoretical bound at this p
  Index excluded = 0;   // diverged trials dropped from the aggregates
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

struct StabilityReport {
  Index n = 0;
  std::vector<TrialRow> rows;
  std::vector<PointStats> points;
  LinearFit fit;                     // point means vs (1 - p)
  double c_l = 0.0;                  // Lipschitz constant feeding the bounds
  double quadratic_remainder = 0.0;  // fitted q >= 0 of the q (1-p)^2 term
};

// Ordinary least squares of ys on xs; throws when all xs coincide.
LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

// First-order bound C (1 - p) ||X||^2 with C = alpha N C_L^2.
double theoretical_bound_filter(double alpha, Index n, double c_l, double p, double x_norm_sq);

// Network version, C = alpha N L^2 C_L^2 C_sigma^{2L} F^{2L}.
double theoretical_bound_gnn(double alpha, Index n, Index l, double c_l, double c_sigma, Index f,
                             double p, double x_norm_sq);

// Nonnegative least-squares coefficient q of the unmodeled second-order term:
// fits point means minus bounds against (1 - p)^2 through the origin.
double fit_quadratic_remainder(const std::vector<double>& ps, const std::vector<double>& means,
                               const std::vector<double>& bounds);

// Per (p, trial): sample a K-length RES sequence from s, measure
// ||Y~ - Y||_F^2 between the sequence and fixed outputs of the same filter.
StabilityReport filter_deviation_experiment(const FilterTapsd& taps, const ShiftOperator& s,
                                            const SpaceTimeSignald& x, const SweepConfig& cfg);

// Open-loop network deviation E ||Phi~ - Phi||_F^2 on the given inputs.
StabilityReport gnn_output_deviation_experiment(const Modeld& model, const ShiftOperator& avg_gso,
                                                const std::vector<SpaceTimeSignald>& inputs,
                                                const SweepConfig& cfg);

// Closed-loop relative cost (perturbed - unperturbed) / unperturbed on the
// test split; diverged rollouts are excluded and counted.
StabilityReport gnn_relative_cost_experiment(const Modeld& model, const ShiftOperator& avg_gso,
                                             const Dataset& data, const SweepConfig& cfg);

// CSV schema: N,p,trial,measured,relative_cost,bound,seed (relative_cost
// empty for deviation experiments).
void save_detail_csv(const StabilityReport& report, const std::string& path);

// CSV schema: N,p,mean,std,bound,slope,intercept,r2 (fit repeated per row).
void save_summary_csv(const StabilityReport& report, const std::string& path);

// Deterministic line chart of mean +/- std vs (1 - p) with the bound overlay.
void save_report_svg(const StabilityReport& report, const std::string& title,
                     const std::string& path);

}  // namespace stgnn
