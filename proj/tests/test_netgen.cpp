#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hoptopo/netgen.hpp"
#include "oracles.hpp"

using namespace hoptopo;

namespace {

void expect_near_count(std::size_t got, double target) {
  EXPECT_GE(static_cast<double>(got), 0.95 * target);
  EXPECT_LE(static_cast<double>(got), 1.05 * target);
}

void expect_sensor_network(const Network& net, std::size_t dims, double target) {
  expect_near_count(net.graph.node_count(), target);
  EXPECT_EQ(net.layout.size(), net.graph.node_count());
  EXPECT_EQ(net.layout.dims(), dims);
  EXPECT_TRUE(net.layout.coords.allFinite());
  EXPECT_EQ(connected_components(net.graph).size(), 1u);
  // Edges agree with the radius actually used.
  for (auto e : net.graph.edges()) {
    EXPECT_LE((net.layout.coords.row(e.u) - net.layout.coords.row(e.v)).norm(), net.radius + 1e-12);
  }
  const double avg_degree = 2.0 * net.graph.edge_count() / net.graph.node_count();
  // A 1.8-pitch ball covers ~10 lattice sites in 2-D and ~24 in 3-D.
  EXPECT_GT(avg_degree, dims == 2 ? 4.0 : 8.0);
  EXPECT_LT(avg_degree, dims == 2 ? 16.0 : 30.0);
}

void expect_same(const Network& a, const Network& b) {
  EXPECT_EQ(a.graph, b.graph);
  EXPECT_EQ(a.layout.coords, b.layout.coords);
}

}  // namespace

TEST(UnitDisk, TwoClosePoints) {
  PointCloud pc{Eigen::MatrixXd(2, 2)};
  pc.coords << 0, 0, 0.5, 0;
  EXPECT_EQ(unit_disk_connect(pc, 1.0).edge_count(), 1u);
}

TEST(UnitDisk, SmallRadiusGivesNoEdges) {
  PointCloud pc{oracle::gaussian(30, 2, 2) * 100};
  EXPECT_EQ(unit_disk_connect(pc, 1e-6).edge_count(), 0u);
}

TEST(UnitDisk, GridInteriorHasEightNeighbors) {
  PointCloud pc{Eigen::MatrixXd(100, 2)};
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) pc.coords.row(y * 10 + x) << x, y;
  Graph g = unit_disk_connect(pc, 1.5);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) {
      const NodeId i = y * 10 + x;
      std::size_t want = 0;  // direct pairwise-distance count
      for (NodeId j = 0; j < 100; ++j)
        if (j != i && (pc.coords.row(i) - pc.coords.row(j)).norm() <= 1.5) ++want;
      EXPECT_EQ(g.degree(i), want);
      if (x > 0 && x < 9 && y > 0 && y < 9) EXPECT_EQ(g.degree(i), 8u);
    }
}

TEST(UnitDisk, RejectsNonPositiveRadius) {
  PointCloud pc{Eigen::MatrixXd::Zero(2, 2)};
  EXPECT_THROW(unit_disk_connect(pc, 0), DataError);
}

TEST(Generators, Concave) {
  Network net = gen_concave_2d({});
  expect_sensor_network(net, 2, 550);
  expect_same(net, gen_concave_2d({}));
  // Non-convex: the notch centre lies inside the bounding box but holds no node.
  const auto& c = net.layout.coords;
  const double cx = 0.5 * (c.col(0).minCoeff() + c.col(0).maxCoeff());
  const double top = c.col(1).maxCoeff();
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    EXPECT_FALSE(std::abs(c(i, 0) - cx) < 2 && c(i, 1) > top - 4) << i;
}

TEST(Generators, CircularVoids) {
  Network net = gen_circular_voids_2d({});
  expect_sensor_network(net, 2, 496);
  expect_same(net, gen_circular_voids_2d({}));
  CircularShape shape;
  EXPECT_GE(shape.voids.size(), 2u);
  for (Eigen::Index i = 0; i < net.layout.coords.rows(); ++i) {
    for (const auto& v : shape.voids) {
      const double dx = net.layout.coords(i, 0) - v.cx, dy = net.layout.coords(i, 1) - v.cy;
      // Jitter can push a node at most sqrt(2) * 0.3 pitches inward.
      EXPECT_GT(std::hypot(dx, dy), v.r - 0.5);
    }
  }
}

TEST(Generators, CubeWithHourglassVoid) {
  Network net = gen_cube_void_3d({});
  expect_sensor_network(net, 3, 1640);
  expect_same(net, gen_cube_void_3d({}));
}

TEST(Generators, TCylinder) {
  Network net = gen_t_cylinder_3d({});
  expect_sensor_network(net, 3, 1245);
  expect_same(net, gen_t_cylinder_3d({}));
}

TEST(Generators, SeedChangesLayout) {
  GeneratorConfig a, b;
  b.seed = 2;
  EXPECT_NE(gen_concave_2d(a).layout.coords, gen_concave_2d(b).layout.coords);
}

TEST(Generators, BadConfigRejected) {
  GeneratorConfig cfg;
  cfg.pitch = 0;
  EXPECT_THROW(gen_concave_2d(cfg), DataError);
  cfg = {};
  cfg.jitter = 0.7;
  EXPECT_THROW(gen_circular_voids_2d(cfg), DataError);
}

TEST(Generators, DisconnectedAfterRetriesFails) {
  GeneratorConfig cfg;
  cfg.radius_factor = 0.2;  // far below the lattice spacing
  cfg.max_retries = 2;
  EXPECT_THROW(gen_concave_2d(cfg), DataError);
}

TEST(Generators, RetryGrowsRadius) {
  GeneratorConfig cfg;
  cfg.jitter = 0;
  cfg.radius_factor = 0.95;  // one 10% step reaches the lattice spacing
  Network net = gen_concave_2d(cfg);
  EXPECT_NEAR(net.radius, 0.95 * 1.1, 1e-12);
  EXPECT_TRUE(is_connected(net.graph));
}

TEST(HolmeKim, FiveHundredNodes) {
  Graph g = gen_holme_kim(500, 3, 0.5, 1);
  EXPECT_EQ(g.node_count(), 500u);
  EXPECT_TRUE(is_connected(g));
  EXPECT_EQ(g, gen_holme_kim(500, 3, 0.5, 1));
  EXPECT_NE(g, gen_holme_kim(500, 3, 0.5, 2));
}

TEST(HolmeKim, PreferentialAttachmentWithoutTriads) {
  Graph g = gen_holme_kim(300, 2, 0.0, 4);
  // Every new node adds exactly m distinct edges.
  EXPECT_EQ(g.edge_count(), (300u - 2u) * 2u);
  EXPECT_TRUE(is_connected(g));
}

TEST(HolmeKim, TriadsRaiseClustering) {
  auto triangles = [](const Graph& g) {
    std::size_t t = 0;
    for (auto e : g.edges())
      for (NodeId w : g.neighbors(e.u))
        if (w > e.v && g.has_edge(e.v, w)) ++t;
    return t;
  };
  EXPECT_GT(triangles(gen_holme_kim(500, 3, 0.8, 1)), 2 * triangles(gen_holme_kim(500, 3, 0.0, 1)));
}

TEST(HolmeKim, HeavyTailedDegrees) {
  std::size_t small_max = 0, big_max = 0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    Graph a = gen_holme_kim(200, 3, 0.5, s), b = gen_holme_kim(3000, 3, 0.5, s);
    for (NodeId u = 0; u < a.node_count(); ++u) small_max = std::max(small_max, a.degree(u));
    for (NodeId u = 0; u < b.node_count(); ++u) big_max = std::max(big_max, b.degree(u));
  }
  EXPECT_GT(big_max, small_max);
  Graph g = gen_holme_kim(3000, 3, 0.5, 9);
  // Tail exponent via the Hill estimator on degrees >= 6 (logged only).
  double acc = 0;
  std::size_t count = 0;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (g.degree(u) >= 6) {
      acc += std::log(g.degree(u) / 5.5);
      ++count;
    }
  }
  const double gamma = 1.0 + count / acc;
  RecordProperty("tail_exponent", std::to_string(gamma));
  std::cout << "Holme-Kim n=3000 tail exponent estimate: " << gamma << "\n";
  EXPECT_GT(big_max, 40u);
}

TEST(HolmeKim, InvalidParameters) {
  EXPECT_THROW(gen_holme_kim(3, 3, 0.5, 1), DataError);
  EXPECT_THROW(gen_holme_kim(10, 0, 0.5, 1), DataError);
  EXPECT_THROW(gen_holme_kim(10, 2, 1.5, 1), DataError);
}

TEST(Snap, PathFromTwoLines) {
  std::istringstream in("0 1\n1 2");
  SnapGraph s = parse_snap_edge_list(in);
  EXPECT_EQ(s.graph, oracle::path(3));
  EXPECT_EQ(s.original_ids, (std::vector<std::int64_t>{0, 1, 2}));
}

TEST(Snap, CommentsBlankLinesAndTabs) {
  std::istringstream in("# Directed graph\n# FromNodeId\tToNodeId\n\n10\t20\n  20 30  \r\n");
  SnapGraph s = parse_snap_edge_list(in);
  EXPECT_EQ(s.graph.node_count(), 3u);
  EXPECT_EQ(s.graph.edge_count(), 2u);
  EXPECT_EQ(s.original_ids, (std::vector<std::int64_t>{10, 20, 30}));
}

TEST(Snap, RemapIsAscendingAndDeduplicated) {
  std::istringstream in("900 5\n5 900\n77 5\n");
  SnapGraph s = parse_snap_edge_list(in);
  EXPECT_EQ(s.original_ids, (std::vector<std::int64_t>{5, 77, 900}));
  EXPECT_EQ(s.graph.edge_count(), 2u);
  EXPECT_TRUE(s.graph.has_edge(0, 2));
  EXPECT_TRUE(s.graph.has_edge(0, 1));
}

TEST(Snap, SelfLoopsSkipped) {
  std::istringstream in("1 1\n1 2\n");
  SnapGraph s = parse_snap_edge_list(in);
  EXPECT_EQ(s.self_loops_skipped, 1u);
  EXPECT_EQ(s.graph.edge_count(), 1u);
}

TEST(Snap, Errors) {
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(parse_snap_edge_list(empty), DataError);
  std::istringstream one("0\n");
  EXPECT_THROW(parse_snap_edge_list(one), DataError);
  std::istringstream three("0 1 2\n");
  EXPECT_THROW(parse_snap_edge_list(three), DataError);
  std::istringstream word("a b\n");
  EXPECT_THROW(parse_snap_edge_list(word), DataError);
  std::istringstream neg("-1 2\n");
  EXPECT_THROW(parse_snap_edge_list(neg), DataError);
  EXPECT_THROW(load_snap_edge_list("/nonexistent/edges.txt"), DataError);
}

TEST(Subgraph, WholeGraph) {
  Graph g = oracle::path(6);
  Subgraph s = subgraph_bfs(g, 0, 6);
  EXPECT_EQ(s.graph, g);
  Graph r = oracle::random_connected(40, 30, 2);
  Subgraph t = subgraph_bfs(r, 17, 40);
  EXPECT_EQ(t.graph.edge_count(), r.edge_count());
  for (auto e : t.graph.edges()) EXPECT_TRUE(r.has_edge(t.parent_ids[e.u], t.parent_ids[e.v]));
}

TEST(Subgraph, SingleNode) {
  Subgraph s = subgraph_bfs(oracle::cycle(5), 3, 1);
  EXPECT_EQ(s.graph.node_count(), 1u);
  EXPECT_EQ(s.parent_ids, std::vector<NodeId>{3});
}

TEST(Subgraph, ConnectedAndInduced) {
  Graph g = gen_holme_kim(3000, 3, 0.5, 3);
  Subgraph s = subgraph_bfs(g, 0, 2000);
  EXPECT_EQ(s.graph.node_count(), 2000u);
  EXPECT_TRUE(is_connected(s.graph));
  std::size_t induced = 0;
  for (NodeId i = 0; i < 2000; ++i)
    for (NodeId j = i + 1; j < 2000; ++j)
      if (g.has_edge(s.parent_ids[i], s.parent_ids[j])) ++induced;
  EXPECT_EQ(s.graph.edge_count(), induced);
}

TEST(Subgraph, ComponentTooSmall) {
  Graph g = Graph::from_edge_list(5, {{0, 1}, {2, 3}, {3, 4}});
  EXPECT_THROW(subgraph_bfs(g, 0, 3), DataError);
  EXPECT_THROW(subgraph_bfs(g, 9, 1), DataError);
}
