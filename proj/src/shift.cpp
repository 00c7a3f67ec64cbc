#include "stgnn/shift.hpp"

#include <sstream>
#include <stdexcept>

namespace stgnn {

std::string to_string(GsoKind kind) {
  return kind == GsoKind::Adjacency ? "adjacency" : "laplacian";
}

GsoKind gso_kind_from_string(const std::string& name) {
  if (name == "adjacency") return GsoKind::Adjacency;
  if (name == "laplacian") return GsoKind::Laplacian;
  throw std::invalid_argument("unknown GSO kind '" + name + "'");
}

ShiftOperator build_gso(const Graph& graph, GsoKind kind) {
  const Index n = graph.node_count();
  Matrixd m = Matrixd::Zero(n, n);
  if (kind == GsoKind::Adjacency) {
    for (const Edge& e : graph.edges()) {
      m(e.i, e.j) = e.weight;
      m(e.j, e.i) = e.weight;
    }
  } else {
    // L = D - A assembled per edge; rows sum to zero exactly.
    for (const Edge& e : graph.edges()) {
      m(e.i, e.j) = -e.weight;
      m(e.j, e.i) = -e.weight;
      m(e.i, e.i) += e.weight;
      m(e.j, e.j) += e.weight;
    }
  }
  return ShiftOperator{kind, std::move(m), graph};
}

SpectralDecomposition eigendecompose(const ShiftOperator& s) {
  Eigen::SelfAdjointEigenSolver<Matrixd> solver(s.matrix);
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigendecompose: solver failed to converge on " << s.size() << "x" << s.size()
        << " matrix (|S|_F = " << s.matrix.norm()
        << ", max|entry| = " << s.matrix.cwiseAbs().maxCoeff() << ")";
    throw std::runtime_error(msg.str());
  }
  return SpectralDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

double alpha_constant(const ShiftOperator& s) {
  if (s.kind == GsoKind::Laplacian) return 2.0;
  int max_degree = 0;
  for (Index i = 0; i < s.size(); ++i) {
    int degree = 0;
    for (Index j = 0; j < s.size(); ++j)
      if (j != i && s.matrix(i, j) != 0.0) ++degree;
    max_degree = std::max(max_degree, degree);
  }
  return static_cast<double>(max_degree);
}

ShiftOperator average_gso(const std::vector<ShiftOperator>& sequence) {
  if (sequence.empty()) throw std::invalid_argument("average_gso: empty sequence");
  const Index n = sequence.front().size();
  const GsoKind kind = sequence.front().kind;
  std::vector<Graph> graphs;
  graphs.reserve(sequence.size());
  for (const ShiftOperator& s : sequence) {
    if (s.size() != n) throw std::invalid_argument("average_gso: dimension mismatch");
    if (s.kind != kind) throw std::invalid_argument("average_gso: kind mismatch");
    graphs.push_back(s.source);
  }
  return build_gso(average_graphs(graphs), kind);
}

}  // namespace stgnn
