#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "stgnn/filter.hpp"
#include "stgnn/frequency.hpp"
#include "stgnn/res.hpp"
#include "stgnn/rng.hpp"
#include "stgnn/shift.hpp"

using namespace stgnn;

TEST_CASE("identity filter returns the input bitwise") {
  const SpaceTimeSignald x = oracle::random_signal(5, 6, 2, 101);
  const Matrixd s = oracle::random_symmetric(5, 102);
  const FilterTapsd taps{{1.0}};
  const SpaceTimeSignald y = apply_stgf(x, taps, s, TimeShiftOperator{6});
  CHECK(oracle::max_abs_diff(x, y) == 0.0);
}

TEST_CASE("zero GSO leaves only the zero-hop term") {
  const SpaceTimeSignald x = oracle::random_signal(4, 5, 1, 103);
  const FilterTapsd taps{{0.25, 3.0, -2.0}};
  const SpaceTimeSignald y =
      apply_stgf(x, taps, Matrixd::Zero(4, 4).eval(), TimeShiftOperator{5});
  for (Index i = 0; i < 4; ++i)
    for (Index t = 0; t < 5; ++t) CHECK(y(i, t, 0) == 0.25 * x(i, t, 0));
}

TEST_CASE("fixed filter matches the matrix-power oracle") {
  // Cycle of 4 plus a chord, order 3, both time-shift modes.
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  g.add_edge(0, 3);
  g.add_edge(0, 2, 0.5);
  const ShiftOperator s = build_gso(g, GsoKind::Adjacency);
  const SpaceTimeSignald x = oracle::random_signal(4, 6, 3, 104);
  const FilterTapsd taps{{0.7, -0.3, 0.2, 0.05}};
  for (const TimeShiftMode mode : {TimeShiftMode::Circulant, TimeShiftMode::ZeroPadDelay}) {
    const SpaceTimeSignald y = apply_stgf(x, taps, s.matrix, TimeShiftOperator{6, mode});
    const SpaceTimeSignald expect = oracle::stgf(x, s.matrix, mode, taps.h);
    CHECK(oracle::max_abs_diff(y, expect) < 1e-12);
  }
}

TEST_CASE("200 random instances match the oracle to 1e-12") {
  for (std::uint32_t trial = 0; trial < 200; ++trial) {
    std::mt19937 gen(9000 + trial);
    const Index n = 2 + static_cast<Index>(gen() % 7);
    const Index horizon = 2 + static_cast<Index>(gen() % 6);
    const Index order = static_cast<Index>(gen() % 5);
    const TimeShiftMode mode =
        (gen() % 2 == 0) ? TimeShiftMode::Circulant : TimeShiftMode::ZeroPadDelay;
    const Matrixd s = oracle::random_symmetric(n, 9000 + trial);
    const SpaceTimeSignald x = oracle::random_signal(n, horizon, 1, 9100 + trial);
    const FilterTapsd taps{oracle::random_taps(order, 9200 + trial)};
    const SpaceTimeSignald y = apply_stgf(x, taps, s, TimeShiftOperator{horizon, mode});
    const SpaceTimeSignald expect = oracle::stgf(x, s, mode, taps.h);
    REQUIRE(oracle::max_abs_diff(y, expect) < 1e-12);
  }
}

TEST_CASE("generalized filter matches the chained-product oracle") {
  const Index n = 5;
  const FilterTapsd taps{{0.4, -0.8, 0.3, 0.1}};
  std::vector<Matrixd> gsos;
  std::vector<ShiftOperator> seq;
  for (int k = 0; k < 3; ++k) {
    const Graph g = oracle::random_graph(n, 0.6, 200 + static_cast<std::uint32_t>(k), true);
    seq.push_back(build_gso(g, GsoKind::Adjacency));
    gsos.push_back(seq.back().matrix);
  }
  const SpaceTimeSignald x = oracle::random_signal(n, 7, 2, 205);
  for (const TimeShiftMode mode : {TimeShiftMode::Circulant, TimeShiftMode::ZeroPadDelay}) {
    const TimeShiftOperator tso{7, mode};
    const SpaceTimeSignald y = apply_generalized_stgf(x, taps, gsos, tso);
    const SpaceTimeSignald expect = oracle::generalized_stgf(x, gsos, mode, taps.h);
    CHECK(oracle::max_abs_diff(y, expect) < 1e-12);
    // The ShiftOperator overload computes the same thing.
    CHECK(oracle::max_abs_diff(apply_generalized_stgf(x, seq, tso, taps), y) == 0.0);
  }
}

TEST_CASE("identical GSO sequence reproduces the fixed filter bitwise") {
  const Matrixd s = oracle::random_symmetric(6, 210);
  const SpaceTimeSignald x = oracle::random_signal(6, 8, 2, 211);
  const FilterTapsd taps{oracle::random_taps(4, 212)};
  const TimeShiftOperator tso{8, TimeShiftMode::Circulant};
  const std::vector<Matrixd> same(4, s);
  CHECK(oracle::max_abs_diff(apply_stgf(x, taps, s, tso),
                             apply_generalized_stgf(x, taps, same, tso)) == 0.0);
}

TEST_CASE("RES draws at p = 1 leave the generalized output bitwise equal") {
  const Graph g = oracle::random_graph(7, 0.5, 220, true);
  const ShiftOperator s = build_gso(g, GsoKind::Adjacency);
  const FilterTapsd taps{oracle::random_taps(3, 221)};
  const SpaceTimeSignald x = oracle::random_signal(7, 6, 1, 222);
  const TimeShiftOperator tso{6, TimeShiftMode::Circulant};
  const auto seq = sample_gso_sequence(s, RESConfig{1.0, 999}, 3);
  std::vector<ShiftOperator> ops;
  for (const auto& draw : seq) ops.push_back(draw.sampled_gso);
  CHECK(oracle::max_abs_diff(apply_stgf(x, s, tso, taps),
                             apply_generalized_stgf(x, ops, tso, taps)) == 0.0);
}

TEST_CASE("filters are linear") {
  const Matrixd s = oracle::random_symmetric(5, 230);
  const SpaceTimeSignald x = oracle::random_signal(5, 6, 2, 231);
  const SpaceTimeSignald y = oracle::random_signal(5, 6, 2, 232);
  const FilterTapsd taps{oracle::random_taps(3, 233)};
  const TimeShiftOperator tso{6, TimeShiftMode::ZeroPadDelay};
  const double a = 1.75, b = -0.4;
  SpaceTimeSignald combo(5, 6, 2);
  for (Index f = 0; f < 2; ++f) combo.slice(f) = a * x.slice(f) + b * y.slice(f);
  const SpaceTimeSignald lhs = apply_stgf(combo, taps, s, tso);
  const SpaceTimeSignald fx = apply_stgf(x, taps, s, tso);
  const SpaceTimeSignald fy = apply_stgf(y, taps, s, tso);
  SpaceTimeSignald rhs(5, 6, 2);
  for (Index f = 0; f < 2; ++f) rhs.slice(f) = a * fx.slice(f) + b * fy.slice(f);
  CHECK(oracle::max_abs_diff(lhs, rhs) < 1e-12);
}

TEST_CASE("graph-spectral inputs come out scaled by the frequency response") {
  // For X(n, t) = v(n) e^{-i w t} with S v = lambda v and a circulant horizon,
  // the filter acts as multiplication by h(lambda, w). The real filter is run
  // on the real and imaginary parts separately.
  const Graph g = oracle::random_graph(8, 0.5, 240, true);
  const ShiftOperator s = build_gso(g, GsoKind::Laplacian);
  const SpectralDecomposition eig = eigendecompose(s);
  const FilterTapsd taps{oracle::random_taps(3, 241)};
  const Index horizon = 12;
  const TimeShiftOperator tso{horizon, TimeShiftMode::Circulant};
  for (const Index eig_index : {0, 3, 7}) {
    for (const Index freq_index : {0, 1, 5}) {
      const double lambda = eig.eigenvalues(eig_index);
      const double omega = 2.0 * M_PI * static_cast<double>(freq_index) / horizon;
      SpaceTimeSignald re(8, horizon, 1), im(8, horizon, 1);
      for (Index n = 0; n < 8; ++n)
        for (Index t = 0; t < horizon; ++t) {
          re(n, t, 0) = eig.eigenvectors(n, eig_index) * std::cos(omega * t);
          im(n, t, 0) = -eig.eigenvectors(n, eig_index) * std::sin(omega * t);
        }
      const SpaceTimeSignald yre = apply_stgf(re, taps, s.matrix, tso);
      const SpaceTimeSignald yim = apply_stgf(im, taps, s.matrix, tso);
      FrequencyPoint pt;
      pt.lambda_vec = Vectord::Constant(taps.order(), lambda);
      pt.omega = omega;
      const std::complex<double> h = frequency_response(taps, pt);
      double worst = 0.0;
      for (Index n = 0; n < 8; ++n)
        for (Index t = 0; t < horizon; ++t) {
          const std::complex<double> in(re(n, t, 0), im(n, t, 0));
          const std::complex<double> out(yre(n, t, 0), yim(n, t, 0));
          worst = std::max(worst, std::abs(out - h * in));
        }
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("sequence length validation") {
  const SpaceTimeSignald x = oracle::random_signal(3, 4, 1, 250);
  const FilterTapsd taps{{1.0, 2.0, 3.0}};
  const TimeShiftOperator tso{4};
  CHECK_THROWS_AS(
      apply_generalized_stgf(x, taps, std::vector<Matrixd>{Matrixd::Zero(3, 3)}, tso),
      std::invalid_argument);
  const std::vector<ShiftOperator> three(3, build_gso(path_graph(3), GsoKind::Adjacency));
  CHECK_THROWS_AS(apply_generalized_stgf(x, three, tso, taps), std::invalid_argument);
  CHECK_THROWS_AS(apply_stgf(x, FilterTapsd{}, Matrixd::Zero(3, 3).eval(), tso),
                  std::invalid_argument);
}

TEST_CASE("taps text round-trip is exact") {
  const FilterTapsd taps{{1.0 / 3.0, -0.12345678901234567, 42.0, 1e-300, 0.0}};
  const std::string path =
      (std::filesystem::temp_directory_path() / "stgnn_taps_roundtrip.txt").string();
  save_taps(taps, path);
  const FilterTapsd back = load_taps(path);
  REQUIRE(back.order() == taps.order());
  for (std::size_t k = 0; k < taps.h.size(); ++k) CHECK(back.h[k] == taps.h[k]);
  std::remove(path.c_str());
}
