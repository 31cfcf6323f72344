#pragma once

// Undirected unweighted graphs, hop (shortest-path) distances and the
// conversions between adjacency, hop-distance and Laplacian forms.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hoptopo/error.hpp"

namespace hoptopo {

using NodeId = std::size_t;
using Hop = std::uint32_t;

/// Distance between nodes in different components.
inline constexpr Hop kUnreachable = std::numeric_limits<Hop>::max();

struct Edge {
  NodeId u;
  NodeId v;
  auto operator<=>(const Edge&) const = default;
};

/// Immutable undirected graph in compressed adjacency form. Neighbor lists
/// are sorted; no self-loops, no multi-edges.
class Graph {
 public:
  Graph() = default;

  /// n isolated nodes.
  explicit Graph(std::size_t n) : offsets_(n + 1, 0) {}

  /// Reversed and repeated pairs collapse to one edge. Throws DataError on
  /// an out-of-range index or a self-loop.
  static Graph from_edge_list(std::size_t n,
                              std::span<const std::pair<NodeId, NodeId>> pairs) {
    std::vector<Edge> edges;
    edges.reserve(pairs.size());
    for (auto [a, b] : pairs) {
      if (a >= n || b >= n) {
        detail::fail("edge (" + std::to_string(a) + "," + std::to_string(b) +
                     ") out of range for n=" + std::to_string(n));
      }
      if (a == b) detail::fail("self-loop at node " + std::to_string(a));
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return Graph(n, edges);
  }

  static Graph from_edge_list(
      std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> pairs) {
    std::vector<std::pair<NodeId, NodeId>> v(pairs);
    return from_edge_list(n, std::span<const std::pair<NodeId, NodeId>>(v));
  }

  std::size_t node_count() const noexcept {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t edge_count() const noexcept { return adjacency_.size() / 2; }

  std::span<const NodeId> neighbors(NodeId u) const {
    return {adjacency_.data() + offsets_[u], adjacency_.data() + offsets_[u + 1]};
  }
  std::size_t degree(NodeId u) const { return offsets_[u + 1] - offsets_[u]; }

  bool has_edge(NodeId u, NodeId v) const {
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
  }

  /// Each edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeId u = 0; u < node_count(); ++u) {
      for (NodeId v : neighbors(u)) {
        if (u < v) out.push_back({u, v});
      }
    }
    return out;
  }

  bool operator==(const Graph&) const = default;

 private:
  // `edges` must be sorted, unique, u < v.
  Graph(std::size_t n, const std::vector<Edge>& edges) : offsets_(n + 1, 0) {
    for (auto e : edges) {
      ++offsets_[e.u + 1];
      ++offsets_[e.v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    adjacency_.resize(2 * edges.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (auto e : edges) {
      adjacency_[fill[e.u]++] = e.v;
      adjacency_[fill[e.v]++] = e.u;
    }
    for (NodeId u = 0; u < n; ++u) {
      std::sort(adjacency_.begin() + offsets_[u],
                adjacency_.begin() + offsets_[u + 1]);
    }
  }

  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
};

/// N x N matrix of hop counts; kUnreachable between components.
class HopDistanceMatrix {
 public:
  HopDistanceMatrix() = default;
  explicit HopDistanceMatrix(std::size_t n) : n_(n), entries_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }

  Hop operator()(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j];
  }
  Hop& operator()(std::size_t i, std::size_t j) { return entries_[i * n_ + j]; }

  std::span<const Hop> row(std::size_t i) const {
    return {entries_.data() + i * n_, n_};
  }

  bool fully_finite() const {
    return std::find(entries_.begin(), entries_.end(), kUnreachable) ==
           entries_.end();
  }

  /// Real-valued copy. Throws DataError if any entry is unreachable, since a
  /// sentinel cast to double would silently poison downstream numerics.
  Eigen::MatrixXd to_dense() const {
    if (!fully_finite()) {
      detail::fail("hop-distance matrix has unreachable entries");
    }
    Eigen::MatrixXd m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    }
    return m;
  }

  double sum() const {
    double s = 0;
    for (Hop h : entries_) {
      if (h == kUnreachable) detail::fail("sum over unreachable entries");
      s += h;
    }
    return s;
  }

  bool operator==(const HopDistanceMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<Hop> entries_;
};

/// Hop distances from a set of anchors: row i holds node i's virtual
/// coordinate, column j corresponds to node anchors()[j].
class VcMatrix {
 public:
  VcMatrix() = default;
  VcMatrix(std::size_t rows, std::vector<NodeId> anchors)
      : rows_(rows),
        anchors_(std::move(anchors)),
        entries_(rows_ * anchors_.size(), 0) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return anchors_.size(); }
  const std::vector<NodeId>& anchors() const noexcept { return anchors_; }

  Hop operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols() + j];
  }
  Hop& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols() + j];
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m(rows_, cols());
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols(); ++j) {
        Hop h = (*this)(i, j);
        if (h == kUnreachable) detail::fail("VC matrix has unreachable entries");
        m(i, j) = h;
      }
    }
    return m;
  }

  bool operator==(const VcMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::vector<NodeId> anchors_;
  std::vector<Hop> entries_;
};

/// Breadth-first hop counts from `source`.
inline std::vector<Hop> bfs_hops(const Graph& g, NodeId source) {
  const std::size_t n = g.node_count();
  detail::require(source < n, "BFS source " + std::to_string(source) +
                                  " out of range for n=" + std::to_string(n));
  std::vector<Hop> dist(n, kUnreachable);
  std::vector<NodeId> frontier;
  frontier.reserve(n);
  dist[source] = 0;
  frontier.push_back(source);
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    NodeId u = frontier[head];
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreachable) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

inline HopDistanceMatrix all_pairs_hops(const Graph& g) {
  const std::size_t n = g.node_count();
  HopDistanceMatrix h(n);
  for (NodeId s = 0; s < n; ++s) {
    auto row = bfs_hops(g, s);
    for (std::size_t j = 0; j < n; ++j) h(s, j) = row[j];
  }
  return h;
}

/// One BFS per anchor. Anchors must be distinct and in range.
inline VcMatrix anchor_hops(const Graph& g, std::span<const NodeId> anchors) {
  const std::size_t n = g.node_count();
  std::vector<char> seen(n, 0);
  for (NodeId a : anchors) {
    detail::require(a < n, "anchor " + std::to_string(a) + " out of range");
    detail::require(!seen[a], "duplicate anchor " + std::to_string(a));
    seen[a] = 1;
  }
  VcMatrix p(n, std::vector<NodeId>(anchors.begin(), anchors.end()));
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    auto col = bfs_hops(g, anchors[j]);
    for (std::size_t i = 0; i < n; ++i) p(i, j) = col[i];
  }
  return p;
}

/// Checks zero diagonal and symmetry. Sentinels are allowed.
inline void validate_hdm(const HopDistanceMatrix& h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    detail::require(h(i, i) == 0, "nonzero diagonal at " + std::to_string(i));
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      if (h(i, j) != h(j, i)) {
        detail::fail("asymmetric hop-distance matrix at (" + std::to_string(i) +
                     "," + std::to_string(j) + ")");
      }
    }
  }
}

/// Edge (i, j) iff h(i, j) == 1.
inline Graph adjacency_from_hdm(const HopDistanceMatrix& h) {
  validate_hdm(h);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (std::size_t j = i + 1; j < h.size(); ++j) {
      if (h(i, j) == 1) pairs.emplace_back(i, j);
    }
  }
  return Graph::from_edge_list(h.size(), pairs);
}

/// Real-valued (e.g. completed) distance matrix: entries are rounded to the
/// nearest integer before thresholding at 1. The rounded matrix must be
/// symmetric and nonnegative.
inline Graph adjacency_from_hdm(const Eigen::MatrixXd& h) {
  detail::require(h.rows() == h.cols(), "distance matrix must be square");
  const auto n = static_cast<std::size_t>(h.rows());
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double r = std::round(h(i, j));
      if (!std::isfinite(h(i, j)) || r < 0) {
        detail::fail("negative or non-finite distance at (" +
                     std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (j > i) {
        if (r != std::round(h(j, i))) {
          detail::fail("asymmetric distance matrix at (" + std::to_string(i) +
                       "," + std::to_string(j) + ")");
        }
        if (r == 1) pairs.emplace_back(i, j);
      }
    }
  }
  return Graph::from_edge_list(n, pairs);
}

inline Eigen::MatrixXd adjacency_matrix(const Graph& g) {
  const auto n = g.node_count();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (auto e : g.edges()) a(e.u, e.v) = a(e.v, e.u) = 1;
  return a;
}

/// L = D - A.
inline Eigen::MatrixXd graph_laplacian(const Graph& g) {
  Eigen::MatrixXd l = -adjacency_matrix(g);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    l(u, u) = static_cast<double>(g.degree(u));
  }
  return l;
}

/// Components in order of their smallest node; nodes ascending within each.
inline std::vector<std::vector<NodeId>> connected_components(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<char> seen(n, 0);
  std::vector<std::vector<NodeId>> parts;
  for (NodeId s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<NodeId> part{s};
    seen[s] = 1;
    for (std::size_t head = 0; head < part.size(); ++head) {
      for (NodeId v : g.neighbors(part[head])) {
        if (!seen[v]) {
          seen[v] = 1;
          part.push_back(v);
        }
      }
    }
    std::sort(part.begin(), part.end());
    parts.push_back(std::move(part));
  }
  return parts;
}

inline bool is_connected(const Graph& g) {
  return g.node_count() <= 1 || connected_components(g).size() == 1;
}

}  // namespace hoptopo
