#include "stgnn/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <utility>

namespace stgnn {

Graph::Graph(Index node_count) : node_count_(node_count) {
  if (node_count < 0) throw std::invalid_argument("Graph: negative node count");
}

void Graph::add_edge(int i, int j, double weight) {
  if (i == j) throw std::invalid_argument("Graph::add_edge: self-loop");
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= node_count_)
    throw std::invalid_argument("Graph::add_edge: node index out of range");
  const Edge e{i, j, weight};
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), e, [](const Edge& a, const Edge& b) {
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  if (pos != edges_.end() && pos->i == i && pos->j == j)
    throw std::invalid_argument("Graph::add_edge: duplicate edge");
  edges_.insert(pos, e);
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  const Edge probe{i, j, 0.0};
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), probe,
                              [](const Edge& a, const Edge& b) {
                                return std::tie(a.i, a.j) < std::tie(b.i, b.j);
                              });
  return pos != edges_.end() && pos->i == i && pos->j == j;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(node_count_), 0);
  for (const Edge& e : edges_) {
    ++deg[static_cast<std::size_t>(e.i)];
    ++deg[static_cast<std::size_t>(e.j)];
  }
  return deg;
}

bool Graph::operator==(const Graph& other) const {
  if (node_count_ != other.node_count_ || edges_.size() != other.edges_.size()) return false;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const Edge& a = edges_[k];
    const Edge& b = other.edges_[k];
    if (a.i != b.i || a.j != b.j || a.weight != b.weight) return false;
  }
  return true;
}

Graph complete_graph(Index n) {
  Graph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

Graph path_graph(Index n) {
  Graph g(n);
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph star_graph(Index leaves) {
  Graph g(leaves + 1);
  for (int i = 1; i <= leaves; ++i) g.add_edge(0, i);
  return g;
}

Graph average_graphs(const std::vector<Graph>& sequence) {
  if (sequence.empty()) throw std::invalid_argument("average_graphs: empty sequence");
  const Index n = sequence.front().node_count();
  for (const Graph& g : sequence)
    if (g.node_count() != n)
      throw std::invalid_argument("average_graphs: node count mismatch");

  // Accumulate weight sums over the union edge set in canonical order.
  std::vector<Edge> sums;
  for (const Graph& g : sequence) {
    for (const Edge& e : g.edges()) {
      auto pos = std::lower_bound(sums.begin(), sums.end(), e, [](const Edge& a, const Edge& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
      });
      if (pos != sums.end() && pos->i == e.i && pos->j == e.j) {
        pos->weight += e.weight;
      } else {
        sums.insert(pos, e);
      }
    }
  }
  Graph avg(n);
  const double count = static_cast<double>(sequence.size());
  for (const Edge& e : sums) avg.add_edge(e.i, e.j, e.weight / count);
  return avg;
}

void save_graph(const Graph& graph, std::ostream& out) {
  out << "N " << graph.node_count() << "\n";
  char buf[64];
  for (const Edge& e : graph.edges()) {
    std::snprintf(buf, sizeof(buf), "%.17g", e.weight);
    out << e.i << " " << e.j << " " << buf << "\n";
  }
}

void save_graph(const Graph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_graph: cannot open " + path);
  save_graph(graph, out);
  if (!out) throw std::runtime_error("save_graph: write failed for " + path);
}

Graph load_graph(std::istream& in) {
  std::string tag;
  Index n = -1;
  if (!(in >> tag >> n) || tag != "N" || n < 0)
    throw std::runtime_error("load_graph: malformed header, expected 'N <count>'");
  Graph g(n);
  int i, j;
  double w;
  while (in >> i >> j >> w) {
    try {
      g.add_edge(i, j, w);
    } catch (const std::invalid_argument& err) {
      throw std::runtime_error(std::string("load_graph: ") + err.what());
    }
  }
  if (!in.eof() && in.fail()) {
    in.clear();
    std::string rest;
    std::getline(in, rest);
    throw std::runtime_error("load_graph: malformed edge line near '" + rest + "'");
  }
  return g;
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_graph: cannot open " + path);
  return load_graph(in);
}

}  // namespace stgnn
