// Graph shift operators and their spectra.
//
// A GSO is the adjacency matrix A or the combinatorial Laplacian L = D - A of
// a graph. Both are assembled symmetrically from the edge list, so S == S^T
// holds exactly (no post-hoc symmetrization).
#pragma once

#include <string>

#include "stgnn/graph.hpp"
#include "stgnn/types.hpp"

namespace stgnn {

enum class GsoKind { Adjacency, Laplacian };

std::string to_string(GsoKind kind);
GsoKind gso_kind_from_string(const std::string& name);

struct ShiftOperator {
  GsoKind kind = GsoKind::Adjacency;
  Matrixd matrix;  // N x N, exactly symmetric
  Graph source;    // graph the operator was built from

  Index size() const { return matrix.rows(); }
};

struct SpectralDecomposition {
  Vectord eigenvalues;   // ascending
  Matrixd eigenvectors;  // orthonormal columns, V diag(lambda) V^T = S
};

ShiftOperator build_gso(const Graph& graph, GsoKind kind);

// Dense symmetric eigendecomposition. Throws std::runtime_error with matrix
// diagnostics if the solver fails to converge.
SpectralDecomposition eigendecompose(const ShiftOperator& s);

// Stability constant of the operator class: the maximum unweighted node
// degree for an adjacency, 2 for a Laplacian.
double alpha_constant(const ShiftOperator& s);

// Entrywise arithmetic mean of a non-empty sequence of same-kind, same-size
// operators. The result is weighted (entries in [0, 1] for averages of 0/1
// adjacencies) and is used directly as a training GSO.
ShiftOperator average_gso(const std::vector<ShiftOperator>& sequence);

}  // namespace stgnn
