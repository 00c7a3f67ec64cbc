#include "stgnn/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stgnn/errors.hpp"
#include "stgnn/parallel.hpp"
#include "stgnn/res.hpp"
#include "stgnn/rng.hpp"

namespace stgnn {

void SweepConfig::validate() const {
  if (probabilities.empty()) throw std::invalid_argument("SweepConfig: empty probability list");
  for (double p : probabilities)
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("SweepConfig: probabilities must lie in [0, 1]");
  if (trials < 1) throw std::invalid_argument("SweepConfig: trials must be >= 1");
}

LinearFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate, all xs equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.slope * xs[i] + fit.intercept);
    ss_res += r * r;
  }
  // Constant ys: the horizontal line is an exact fit.
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

double theoretical_bound_filter(double alpha, Index n, double c_l, double p, double x_norm_sq) {
  return alpha * static_cast<double>(n) * c_l * c_l * (1.0 - p) * x_norm_sq;
}

double theoretical_bound_gnn(double alpha, Index n, Index l, double c_l, double c_sigma, Index f,
                             double p, double x_norm_sq) {
  const double ld = static_cast<double>(l);
  const double two_l = 2.0 * ld;
  const double c = alpha * static_cast<double>(n) * ld * ld * c_l * c_l *
                   std::pow(c_sigma, two_l) * std::pow(static_cast<double>(f), two_l);
  return c * (1.0 - p) * x_norm_sq;
}

double fit_quadratic_remainder(const std::vector<double>& ps, const std::vector<double>& means,
                               const std::vector<double>& bounds) {
  if (ps.size() != means.size() || ps.size() != bounds.size())
    throw std::invalid_argument("fit_quadratic_remainder: length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double q = (1.0 - ps[i]) * (1.0 - ps[i]);
    num += (means[i] - bounds[i]) * q;
    den += q * q;
  }
  if (den == 0.0) return 0.0;
  return std::max(0.0, num / den);
}

namespace {

double sample_stddev(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

// Shared aggregation: group valid rows by probability (preserving the sweep
// order), compute mean/std of the chosen value, fit means vs (1 - p).
void aggregate(StabilityReport& report, const SweepConfig& cfg,
               const std::vector<char>& valid, const std::vector<Index>& excluded_per_point,
               bool use_relative) {
  const Index trials = cfg.trials;
  std::vector<double> xs, ys;
  for (std::size_t pi = 0; pi < cfg.probabilities.size(); ++pi) {
    const double p = cfg.probabilities[pi];
    std::vector<double> values;
    double bound_sum = 0.0;
    Index bound_count = 0;
    for (Index t = 0; t < trials; ++t) {
      const std::size_t idx = pi * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t);
      if (!valid[idx]) continue;
      const TrialRow& row = report.rows[idx];
      values.push_back(use_relative ? row.relative : row.measured);
      bound_sum += row.bound;
      ++bound_count;
    }
    PointStats stats;
    stats.n = report.n;
    stats.p = p;
    stats.excluded = excluded_per_point[pi];
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      stats.mean = sum / static_cast<double>(values.size());
      stats.stddev = sample_stddev(values, stats.mean);
      stats.bound = bound_sum / static_cast<double>(bound_count);
      xs.push_back(1.0 - p);
      ys.push_back(stats.mean);
    }
    report.points.push_back(stats);
  }
  // Drop rows of fully-excluded points; the fit needs two distinct abscissae.
  if (xs.size() >= 2) {
    bool distinct = false;
    for (std::size_t i = 1; i < xs.size(); ++i) distinct = distinct || xs[i] != xs[0];
    if (distinct) report.fit = linear_fit(xs, ys);
  }
  std::vector<double> ps, means, bounds;
  for (const PointStats& s : report.points) {
    ps.push_back(s.p);
    means.push_back(s.mean);
    bounds.push_back(s.bound);
  }
  report.quadratic_remainder = fit_quadratic_remainder(ps, means, bounds);
}

Interval spectrum_interval(const ShiftOperator& s) {
  const SpectralDecomposition eig = eigendecompose(s);
  return {eig.eigenvalues.minCoeff(), eig.eigenvalues.maxCoeff()};
}

double max_filter_c_l(const Modeld& model, const Interval& range) {
  double c_l = 0.0;
  for (const LayerParams<double>& layer : model.layers)
    for (const FilterTapsd& taps : layer.taps)
      c_l = std::max(c_l, estimate_c_l(taps, range, 64, 64).c_l);
  return c_l;
}

std::vector<Matrixd> sequence_matrices(const ShiftOperator& nominal, double p, std::uint64_t seed,
                                       Index length) {
  std::vector<Matrixd> out;
  if (length == 0) return out;
  const std::vector<PerturbationSample> seq = sample_gso_sequence(nominal, {p, seed}, length);
  out.reserve(seq.size());
  for (const PerturbationSample& s : seq) out.push_back(s.sampled_gso.matrix);
  return out;
}

}  // namespace

StabilityReport filter_deviation_experiment(const FilterTapsd& taps, const ShiftOperator& s,
                                            const SpaceTimeSignald& x, const SweepConfig& cfg) {
  cfg.validate();
  if (taps.h.empty()) throw std::invalid_argument("filter_deviation_experiment: empty taps");
  StabilityReport report;
  report.n = s.size();
  const Index order = taps.order();
  report.c_l = estimate_c_l(taps, spectrum_interval(s), 64, 64).c_l;
  const double alpha = alpha_constant(s);
  const double x_norm_sq = x.squared_norm();
  const TimeShiftOperator tso{x.horizon(), TimeShiftMode::Circulant};
  const SpaceTimeSignald y_fixed = apply_stgf(x, taps, s.matrix, tso);

  const Index trials = cfg.trials;
  const std::size_t total = cfg.probabilities.size() * static_cast<std::size_t>(trials);
  report.rows.resize(total);
  std::vector<char> valid(total, 1);
  parallel_for(cfg.jobs, static_cast<Index>(total), [&](Index idx) {
    const std::size_t pi = static_cast<std::size_t>(idx) / static_cast<std::size_t>(trials);
    const Index trial = idx % trials;
    const double p = cfg.probabilities[pi];
    const std::uint64_t seed =
        derive_seed(cfg.seed, seed_stream::sweep_trial, static_cast<std::uint64_t>(idx));
    double measured = 0.0;
    if (order > 0) {
      const std::vector<Matrixd> seq = sequence_matrices(s, p, seed, order);
      const SpaceTimeSignald y_gen = apply_generalized_stgf(x, taps, seq, tso);
      for (Index f = 0; f < x.features(); ++f)
        measured += (y_gen.slice(f) - y_fixed.slice(f)).squaredNorm();
    }
    TrialRow& row = report.rows[static_cast<std::size_t>(idx)];
    row.n = report.n;
    row.p = p;
    row.trial = trial;
    row.measured = measured;
    row.bound = theoretical_bound_filter(alpha, report.n, report.c_l, p, x_norm_sq);
    row.seed = seed;
  });
  aggregate(report, cfg, valid, std::vector<Index>(cfg.probabilities.size(), 0), false);
  return report;
}

StabilityReport gnn_output_deviation_experiment(const Modeld& model, const ShiftOperator& avg_gso,
                                                const std::vector<SpaceTimeSignald>& inputs,
                                                const SweepConfig& cfg) {
  cfg.validate();
  if (inputs.empty())
    throw std::invalid_argument("gnn_output_deviation_experiment: no inputs");
  StabilityReport report;
  report.n = avg_gso.size();
  const Index order = model.config.order;
  report.c_l = max_filter_c_l(model, spectrum_interval(avg_gso));
  const double alpha = alpha_constant(avg_gso);

  // Unperturbed outputs, one per distinct input.
  const TimeShiftOperator tso{inputs.front().horizon(), TimeShiftMode::ZeroPadDelay};
  std::vector<SpaceTimeSignald> y_fixed;
  y_fixed.reserve(inputs.size());
  for (const SpaceTimeSignald& in : inputs)
    y_fixed.push_back(model_forward(in, model, avg_gso.matrix, tso));

  const Index trials = cfg.trials;
  const std::size_t total = cfg.probabilities.size() * static_cast<std::size_t>(trials);
  report.rows.resize(total);
  std::vector<char> valid(total, 1);
  parallel_for(cfg.jobs, static_cast<Index>(total), [&](Index idx) {
    const std::size_t pi = static_cast<std::size_t>(idx) / static_cast<std::size_t>(trials);
    const Index trial = idx % trials;
    const double p = cfg.probabilities[pi];
    const std::size_t which = static_cast<std::size_t>(trial) % inputs.size();
    const SpaceTimeSignald& input = inputs[which];
    const std::uint64_t seed =
        derive_seed(cfg.seed, seed_stream::sweep_trial, static_cast<std::uint64_t>(idx));
    double measured = 0.0;
    if (order > 0) {
      const std::vector<Matrixd> seq = sequence_matrices(avg_gso, p, seed, order);
      const SpaceTimeSignald y_gen = generalized_model_forward(input, model, seq, tso);
      for (Index f = 0; f < y_gen.features(); ++f)
        measured += (y_gen.slice(f) - y_fixed[which].slice(f)).squaredNorm();
    }
    TrialRow& row = report.rows[static_cast<std::size_t>(idx)];
    row.n = report.n;
    row.p = p;
    row.trial = trial;
    row.measured = measured;
    row.bound = theoretical_bound_gnn(alpha, report.n, model.config.layers, report.c_l, 1.0,
                                      model.config.features, p, input.squared_norm());
    row.seed = seed;
  });
  aggregate(report, cfg, valid, std::vector<Index>(cfg.probabilities.size(), 0), false);
  return report;
}

StabilityReport gnn_relative_cost_experiment(const Modeld& model, const ShiftOperator& avg_gso,
                                             const Dataset& data, const SweepConfig& cfg) {
  cfg.validate();
  const std::vector<TrainingExample>& pool = data.test.empty() ? data.validation : data.test;
  if (pool.empty())
    throw std::invalid_argument("gnn_relative_cost_experiment: no evaluation examples");
  StabilityReport report;
  report.n = avg_gso.size();
  report.c_l = max_filter_c_l(model, spectrum_interval(avg_gso));
  const double alpha = alpha_constant(avg_gso);

  // Unperturbed baselines per example: fixed-graph rollout on the nominal GSO.
  std::vector<FlockState> initials;
  std::vector<double> base_cost;
  std::vector<double> base_norm_sq;
  for (const TrainingExample& ex : pool) {
    initials.push_back(ex.initial_state());
    RolloutOptions opts;
    opts.mode = RolloutMode::FixedGraph;
    opts.nominal = avg_gso;
    const Trajectory traj = closed_loop_rollout(model, data.config, initials.back(), opts);
    base_cost.push_back(validation_cost(traj));
    base_norm_sq.push_back(trajectory_features(traj).squared_norm());
  }

  const Index trials = cfg.trials;
  const std::size_t total = cfg.probabilities.size() * static_cast<std::size_t>(trials);
  report.rows.resize(total);
  std::vector<char> valid(total, 1);
  parallel_for(cfg.jobs, static_cast<Index>(total), [&](Index idx) {
    const std::size_t pi = static_cast<std::size_t>(idx) / static_cast<std::size_t>(trials);
    const Index trial = idx % trials;
    const double p = cfg.probabilities[pi];
    const std::size_t which = static_cast<std::size_t>(trial) % pool.size();
    const std::uint64_t seed =
        derive_seed(cfg.seed, seed_stream::sweep_trial, static_cast<std::uint64_t>(idx));
    TrialRow& row = report.rows[static_cast<std::size_t>(idx)];
    row.n = report.n;
    row.p = p;
    row.trial = trial;
    row.has_relative = true;
    row.seed = seed;
    row.bound = theoretical_bound_gnn(alpha, report.n, model.config.layers, report.c_l, 1.0,
                                      model.config.features, p, base_norm_sq[which]);
    try {
      RolloutOptions opts;
      opts.mode = RolloutMode::ResSampled;
      opts.nominal = avg_gso;
      opts.res_probability = p;
      opts.res_seed = seed;
      const Trajectory traj = closed_loop_rollout(model, data.config, initials[which], opts);
      row.measured = validation_cost(traj);
      row.relative = (row.measured - base_cost[which]) / base_cost[which];
    } catch (const DivergenceError&) {
      valid[static_cast<std::size_t>(idx)] = 0;
    }
  });
  std::vector<Index> excluded(cfg.probabilities.size(), 0);
  for (std::size_t pi = 0; pi < cfg.probabilities.size(); ++pi)
    for (Index t = 0; t < trials; ++t)
      if (!valid[pi * static_cast<std::size_t>(trials) + static_cast<std::size_t>(t)])
        ++excluded[pi];
  aggregate(report, cfg, valid, excluded, true);
  // Diverged trials stay out of the emitted rows too.
  std::vector<TrialRow> kept;
  kept.reserve(report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i)
    if (valid[i]) kept.push_back(report.rows[i]);
  report.rows = std::move(kept);
  return report;
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void save_detail_csv(const StabilityReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_detail_csv: cannot open " + path);
  out << "N,p,trial,measured,relative_cost,bound,seed\n";
  for (const TrialRow& row : report.rows) {
    out << row.n << ',' << fmt_double(row.p) << ',' << row.trial << ','
        << fmt_double(row.measured) << ','
        << (row.has_relative ? fmt_double(row.relative) : std::string()) << ','
        << fmt_double(row.bound) << ',' << row.seed << '\n';
  }
  if (!out) throw std::runtime_error("save_detail_csv: write failed for " + path);
}

void save_summary_csv(const StabilityReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_summary_csv: cannot open " + path);
  out << "N,p,mean,std,bound,slope,intercept,r2\n";
  for (const PointStats& s : report.points) {
    out << s.n << ',' << fmt_double(s.p) << ',' << fmt_double(s.mean) << ','
        << fmt_double(s.stddev) << ',' << fmt_double(s.bound) << ','
        << fmt_double(report.fit.slope) << ',' << fmt_double(report.fit.intercept) << ','
        << fmt_double(report.fit.r_squared) << '\n';
  }
  if (!out) throw std::runtime_error("save_summary_csv: write failed for " + path);
}

void save_report_svg(const StabilityReport& report, const std::string& title,
                     const std::string& path) {
  // Pure function of the report: no timestamps, fixed numeric formatting.
  constexpr double kWidth = 640.0, kHeight = 420.0;
  constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_max = 0.0, y_max = 0.0;
  for (const PointStats& s : report.points) {
    x_max = std::max(x_max, 1.0 - s.p);
    y_max = std::max({y_max, s.mean + s.stddev, s.bound});
  }
  if (x_max <= 0.0) x_max = 1.0;
  if (y_max <= 0.0) y_max = 1.0;
  const auto sx = [&](double x) { return kLeft + plot_w * (x / x_max); };
  const auto sy = [&](double y) { return kTop + plot_h * (1.0 - y / y_max); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">1 - p</text>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double xv = x_max * tick / 4.0;
    const double yv = y_max * tick / 4.0;
    svg << "<text x=\"" << sx(xv) << "\" y=\"" << kTop + plot_h + 16
        << "\" text-anchor=\"middle\" font-size=\"10\">" << fmt_short(xv) << "</text>\n";
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy(yv) + 3
        << "\" text-anchor=\"end\" font-size=\"10\">" << fmt_short(yv) << "</text>\n";
  }
  // Bound overlay.
  svg << "<polyline fill=\"none\" stroke=\"#cc3333\" stroke-dasharray=\"6 3\" points=\"";
  for (const PointStats& s : report.points)
    svg << fmt_short(sx(1.0 - s.p)) << ',' << fmt_short(sy(std::min(s.bound, y_max))) << ' ';
  svg << "\"/>\n";
  // Mean line with whiskers.
  svg << "<polyline fill=\"none\" stroke=\"#3355cc\" points=\"";
  for (const PointStats& s : report.points)
    svg << fmt_short(sx(1.0 - s.p)) << ',' << fmt_short(sy(s.mean)) << ' ';
  svg << "\"/>\n";
  for (const PointStats& s : report.points) {
    const double cx = sx(1.0 - s.p);
    svg << "<line x1=\"" << fmt_short(cx) << "\" y1=\"" << fmt_short(sy(s.mean - s.stddev))
        << "\" x2=\"" << fmt_short(cx) << "\" y2=\"" << fmt_short(sy(s.mean + s.stddev))
        << "\" stroke=\"#3355cc\"/>\n";
    svg << "<circle cx=\"" << fmt_short(cx) << "\" cy=\"" << fmt_short(sy(s.mean))
        << "\" r=\"3\" fill=\"#3355cc\"/>\n";
  }
  svg << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 14
      << "\" font-size=\"11\" fill=\"#3355cc\">mean +/- std</text>\n";
  svg << "<text x=\"" << kLeft + 8 << "\" y=\"" << kTop + 30
      << "\" font-size=\"11\" fill=\"#cc3333\">first-order bound</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("save_report_svg: cannot open " + path);
  out << svg.str();
  if (!out) throw std::runtime_error("save_report_svg: write failed for " + path);
}

}  // namespace stgnn
