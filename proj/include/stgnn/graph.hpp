// Undirected weighted graphs.
//
// Edges are unordered pairs (i, j), i != j, stored once in canonical order
// (i < j, lexicographically sorted). Iteration order is therefore
// deterministic, which everything downstream relies on for reproducibility.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stgnn/types.hpp"

namespace stgnn {

struct Edge {
  int i = 0;  // i < j
  int j = 0;
  double weight = 1.0;
};

class Graph {
 public:
  Graph() = default;
  explicit Graph(Index node_count);

  // Throws std::invalid_argument on self-loops, duplicate pairs, or
  // out-of-range node indices.
  void add_edge(int i, int j, double weight = 1.0);

  Index node_count() const { return node_count_; }
  Index edge_count() const { return static_cast<Index>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_edge(int i, int j) const;

  // Unweighted degree (incident edge count) per node.
  std::vector<int> degrees() const;

  bool operator==(const Graph& other) const;

 private:
  Index node_count_ = 0;
  std::vector<Edge> edges_;  // sorted by (i, j)
};

// Complete graph on n nodes, unit weights.
Graph complete_graph(Index n);

// Path 0-1-...-(n-1), unit weights.
Graph path_graph(Index n);

// Star with the hub at node 0 and `leaves` leaf nodes.
Graph star_graph(Index leaves);

// Entrywise mean of a non-empty sequence of graphs over the same node set:
// the union of the edge sets, each edge weighted by the mean of its weights
// over the sequence (absent = 0).
Graph average_graphs(const std::vector<Graph>& sequence);

// Line-oriented text format: header "N <count>", then one "i j w" line per
// edge. Weights round-trip exactly (17 significant digits). The loader
// rejects self-loops and duplicate pairs.
void save_graph(const Graph& graph, std::ostream& out);
void save_graph(const Graph& graph, const std::string& path);
Graph load_graph(std::istream& in);
Graph load_graph(const std::string& path);

}  // namespace stgnn
