#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "hoptopo/graph.hpp"
#include "hoptopo/lowrank.hpp"
#include "oracles.hpp"

using namespace hoptopo;

namespace {

void expect_hdm_invariants(const Graph& g, const HopDistanceMatrix& h) {
  const std::size_t n = g.node_count();
  ASSERT_EQ(h.size(), n);
  for (std::size_t i = 0; i < n; ++i) {
    EXPECT_EQ(h(i, i), 0u);
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_EQ(h(i, j), h(j, i));
      EXPECT_EQ(h(i, j) == 1, g.has_edge(i, j)) << i << "," << j;
      if (h(i, j) == kUnreachable) continue;
      for (std::size_t k = 0; k < n; ++k) {
        if (h(i, k) == kUnreachable || h(k, j) == kUnreachable) continue;
        ASSERT_LE(h(i, j), h(i, k) + h(k, j));
      }
    }
  }
}

void expect_equals_floyd(const Graph& g, const HopDistanceMatrix& h) {
  auto fw = oracle::floyd_warshall(g);
  for (std::size_t i = 0; i < g.node_count(); ++i)
    for (std::size_t j = 0; j < g.node_count(); ++j) {
      if (fw[i][j] >= oracle::kInf) ASSERT_EQ(h(i, j), kUnreachable);
      else ASSERT_EQ(h(i, j), fw[i][j]) << i << "," << j;
    }
}

}  // namespace

TEST(Graph, ReversedPairCollapses) {
  Graph g = Graph::from_edge_list(3, {{0, 1}, {1, 0}, {1, 2}});
  EXPECT_EQ(g.node_count(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(Graph, EmptyEdgeList) {
  Graph g = Graph::from_edge_list(2, {});
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Graph, RejectsOutOfRangeAndSelfLoops) {
  EXPECT_THROW(Graph::from_edge_list(4, {{0, 5}}), DataError);
  EXPECT_THROW(Graph::from_edge_list(4, {{2, 2}}), DataError);
}

TEST(Graph, EdgesAreCanonical) {
  Graph g = Graph::from_edge_list(4, {{3, 1}, {2, 0}, {1, 0}});
  auto e = g.edges();
  ASSERT_EQ(e.size(), 3u);
  EXPECT_EQ(e[0], (Edge{0, 1}));
  EXPECT_EQ(e[1], (Edge{0, 2}));
  EXPECT_EQ(e[2], (Edge{1, 3}));
}

TEST(Bfs, PathGraph) {
  EXPECT_EQ(bfs_hops(oracle::path(3), 0), (std::vector<Hop>{0, 1, 2}));
}

TEST(Bfs, CompleteGraph) {
  EXPECT_EQ(bfs_hops(oracle::complete(4), 2), (std::vector<Hop>{1, 1, 0, 1}));
}

TEST(Bfs, PetersenDiameterTwo) {
  Graph g = oracle::petersen();
  auto fw = oracle::floyd_warshall(g);
  for (NodeId s = 0; s < 10; ++s) {
    auto d = bfs_hops(g, s);
    EXPECT_EQ(*std::max_element(d.begin(), d.end()), 2u);
    for (NodeId t = 0; t < 10; ++t) EXPECT_EQ(d[t], fw[s][t]);
  }
}

TEST(Bfs, SourceOutOfRange) { EXPECT_THROW(bfs_hops(oracle::path(3), 3), DataError); }

TEST(AllPairs, CycleFourIsCirculant) {
  HopDistanceMatrix h = all_pairs_hops(oracle::cycle(4));
  const Hop first[] = {0, 1, 2, 1};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(h(i, j), first[(j + 4 - i) % 4]);
  expect_equals_floyd(oracle::cycle(4), h);
}

TEST(AllPairs, DisconnectedUsesSentinel) {
  Graph g = Graph::from_edge_list(4, {{0, 1}, {2, 3}});
  HopDistanceMatrix h = all_pairs_hops(g);
  EXPECT_EQ(h(0, 1), 1u);
  EXPECT_EQ(h(0, 2), kUnreachable);
  EXPECT_EQ(h(3, 1), kUnreachable);
  EXPECT_FALSE(h.fully_finite());
  EXPECT_THROW(h.to_dense(), DataError);
  EXPECT_THROW(h.sum(), DataError);
}

TEST(AllPairs, CompleteGraphAllOnes) {
  HopDistanceMatrix h = all_pairs_hops(oracle::complete(6));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(h(i, j), i == j ? 0u : 1u);
}

TEST(AllPairs, StackedBfsRows) {
  Graph g = oracle::random_connected(40, 30, 5);
  HopDistanceMatrix h = all_pairs_hops(g);
  for (NodeId s = 0; s < 40; ++s) {
    auto row = bfs_hops(g, s);
    EXPECT_TRUE(std::equal(row.begin(), row.end(), h.row(s).begin()));
  }
}

TEST(AllPairs, InvariantsOnRandomGraphs) {
  for (std::uint32_t seed = 0; seed < 12; ++seed) {
    Graph g = oracle::random_graph(20 + seed * 20, 0.02 + 0.01 * (seed % 4), seed);
    HopDistanceMatrix h = all_pairs_hops(g);
    expect_hdm_invariants(g, h);
    expect_equals_floyd(g, h);
  }
}

TEST(AllPairs, InvariantsAtThreeHundredNodes) {
  Graph g = oracle::random_connected(300, 150, 77);
  expect_hdm_invariants(g, all_pairs_hops(g));
}

TEST(AnchorHops, PathSingleAnchor) {
  std::vector<NodeId> a{0};
  VcMatrix p = anchor_hops(oracle::path(3), a);
  EXPECT_EQ(p.rows(), 3u);
  EXPECT_EQ(p.cols(), 1u);
  EXPECT_EQ(p(0, 0), 0u);
  EXPECT_EQ(p(1, 0), 1u);
  EXPECT_EQ(p(2, 0), 2u);
}

TEST(AnchorHops, AllNodesAsAnchorsIsFullHdm) {
  Graph g = oracle::random_connected(35, 20, 9);
  std::vector<NodeId> all(35);
  for (NodeId i = 0; i < 35; ++i) all[i] = i;
  EXPECT_EQ(anchor_hops(g, all).to_dense(), all_pairs_hops(g).to_dense());
}

TEST(AnchorHops, ColumnsMatchHdmAndZeroAtSelf) {
  Graph g = oracle::random_connected(50, 40, 3);
  std::vector<NodeId> a{7, 0, 42, 13};
  VcMatrix p = anchor_hops(g, a);
  HopDistanceMatrix h = all_pairs_hops(g);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_EQ(p(i, j), h(i, a[j]));
      EXPECT_EQ(p(i, j) == 0, i == a[j]);
    }
  EXPECT_EQ(p.anchors(), a);
}

TEST(AnchorHops, RejectsDuplicatesAndRange) {
  Graph g = oracle::path(5);
  std::vector<NodeId> dup{1, 1}, far{9};
  EXPECT_THROW(anchor_hops(g, dup), DataError);
  EXPECT_THROW(anchor_hops(g, far), DataError);
}

TEST(AdjacencyFromHdm, CycleRoundTrip) {
  Graph c4 = oracle::cycle(4);
  EXPECT_EQ(adjacency_from_hdm(all_pairs_hops(c4)), c4);
}

TEST(AdjacencyFromHdm, AllOnesIsComplete) {
  HopDistanceMatrix h(5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) h(i, j) = i == j ? 0 : 1;
  EXPECT_EQ(adjacency_from_hdm(h), oracle::complete(5));
}

TEST(AdjacencyFromHdm, RoundTripOnRandomConnectedGraphs) {
  for (std::uint32_t seed = 0; seed < 10; ++seed) {
    Graph g = oracle::random_connected(60, 40, seed);
    HopDistanceMatrix h = all_pairs_hops(g);
    EXPECT_EQ(all_pairs_hops(adjacency_from_hdm(h)), h);
  }
}

TEST(AdjacencyFromHdm, RealValuedInputIsRounded) {
  Graph g = oracle::random_connected(30, 20, 4);
  Eigen::MatrixXd h = all_pairs_hops(g).to_dense();
  Eigen::MatrixXd noisy = h + 0.3 * oracle::gaussian(30, 30, 1).cwiseMax(-1).cwiseMin(1);
  noisy = 0.5 * (noisy + noisy.transpose()).eval();
  noisy.diagonal().setZero();
  EXPECT_EQ(adjacency_from_hdm(noisy), g);
  // Completion with nothing missing hands the matrix back unchanged.
  CompletionResult r = complete_nuclear_norm(ObservedMatrix::full(h, ObservationMode::kSymmetric));
  EXPECT_EQ(adjacency_from_hdm(r.L), g);
}

TEST(AdjacencyFromHdm, RejectsAsymmetricOrNegative) {
  HopDistanceMatrix h(3);
  h(0, 1) = 1;
  EXPECT_THROW(adjacency_from_hdm(h), DataError);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = m(1, 0) = -1;
  EXPECT_THROW(adjacency_from_hdm(m), DataError);
  m(0, 1) = 1;
  m(1, 0) = 2;
  EXPECT_THROW(adjacency_from_hdm(m), DataError);
}

TEST(Laplacian, SingleEdge) {
  Eigen::MatrixXd l = graph_laplacian(Graph::from_edge_list(2, {{0, 1}}));
  Eigen::Matrix2d want;
  want << 1, -1, -1, 1;
  EXPECT_EQ(l, Eigen::MatrixXd(want));
}

TEST(Laplacian, K3Eigenvalues) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(graph_laplacian(oracle::complete(3)));
  EXPECT_NEAR(es.eigenvalues()(0), 0, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(1), 3, 1e-12);
  EXPECT_NEAR(es.eigenvalues()(2), 3, 1e-12);
}

TEST(Laplacian, RowSumsZeroAndPsd) {
  Graph g = oracle::random_graph(60, 0.08, 11);
  Eigen::MatrixXd l = graph_laplacian(g);
  EXPECT_LT(l.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Laplacian, RankIsNodesMinusComponents) {
  for (std::size_t c = 1; c <= 4; ++c) {
    for (std::uint32_t seed = 0; seed < 5; ++seed) {
      Graph g = oracle::random_components(15, c, seed + 100 * static_cast<std::uint32_t>(c));
      ASSERT_EQ(connected_components(g).size(), c);
      Eigen::MatrixXd l = graph_laplacian(g);
      EXPECT_EQ(numerical_rank(l, 1e-8), g.node_count() - c);
      EXPECT_EQ(oracle::jacobi_rank(l, 1e-8), g.node_count() - c);
    }
  }
}

TEST(Components, TwoTriangles) {
  Graph g = Graph::from_edge_list(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  auto parts = connected_components(g);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0], (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(parts[1], (std::vector<NodeId>{3, 4, 5}));
  EXPECT_FALSE(is_connected(g));
}

TEST(Components, GridIsConnected) {
  EXPECT_EQ(connected_components(oracle::grid(7, 5)).size(), 1u);
  EXPECT_TRUE(is_connected(oracle::grid(7, 5)));
}

TEST(Components, IsolatedNodes) {
  auto parts = connected_components(Graph(5));
  ASSERT_EQ(parts.size(), 5u);
  for (NodeId i = 0; i < 5; ++i) EXPECT_EQ(parts[i], std::vector<NodeId>{i});
}

TEST(AdjacencyRank, CompleteGraphRankRecorded) {
  // Without self-loops, A(K_n) = J - I has eigenvalues n-1 and -1, so it is
  // full rank; only the all-ones convention J has rank 1.
  for (std::size_t n : {3, 5, 8}) {
    Eigen::MatrixXd a = adjacency_matrix(oracle::complete(n));
    EXPECT_EQ(numerical_rank(a), n);
    EXPECT_EQ(numerical_rank(a + Eigen::MatrixXd::Identity(n, n)), 1u);
  }
}
