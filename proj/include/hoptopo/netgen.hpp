#pragma once

// Evaluation topologies: perturbed-lattice sensor deployments with
// concavities and voids, Holme-Kim power-law graphs, and SNAP edge lists.
//
// Deployments are parametric stand-ins for the published layouts. Node
// membership is decided on the unperturbed lattice, so node counts do not
// depend on the seed; the seed only drives the jitter.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hoptopo/error.hpp"
#include "hoptopo/graph.hpp"
#include "hoptopo/rng.hpp"

namespace hoptopo {

/// n points in 2-D or 3-D, one per row.
struct PointCloud {
  Eigen::MatrixXd coords;

  std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(coords.cols()); }
};

struct GeneratorConfig {
  std::uint64_t seed = 1;
  double pitch = 1.0;          ///< lattice spacing
  double jitter = 0.3;         ///< max displacement per axis, in pitches
  double radius_factor = 1.8;  ///< comm radius = radius_factor * pitch
  int max_retries = 5;         ///< radius retries if disconnected
  double radius_growth = 0.10; ///< per-retry radius increase

  double comm_radius() const { return radius_factor * pitch; }
};

struct Network {
  PointCloud layout;
  Graph graph;
  double pitch = 1.0;
  double radius = 0.0;  ///< radius actually used (after retries)
};

/// Edge iff Euclidean distance <= radius.
inline Graph unit_disk_connect(const PointCloud& pc, double radius) {
  detail::require(radius > 0, "connection radius must be positive");
  const std::size_t n = pc.size();
  const double r2 = radius * radius;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((pc.coords.row(i) - pc.coords.row(j)).squaredNorm() <= r2) {
        pairs.emplace_back(i, j);
      }
    }
  }
  return Graph::from_edge_list(n, pairs);
}

namespace detail {

inline PointCloud to_cloud(const std::vector<Eigen::VectorXd>& pts) {
  PointCloud pc;
  if (pts.empty()) return pc;
  pc.coords.resize(static_cast<Eigen::Index>(pts.size()), pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    pc.coords.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  }
  return pc;
}

inline void check_config(const GeneratorConfig& cfg) {
  require(cfg.pitch > 0, "pitch must be positive");
  require(cfg.comm_radius() > 0, "comm radius must be positive");
  require(cfg.jitter >= 0 && cfg.jitter < 0.5, "jitter must be in [0, 0.5)");
  require(cfg.max_retries >= 0, "max_retries must be nonnegative");
}

/// Connect with growing radius until connected.
inline Network connect_or_fail(PointCloud pc, const GeneratorConfig& cfg,
                               const std::string& name) {
  double radius = cfg.comm_radius();
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    Graph g = unit_disk_connect(pc, radius);
    if (is_connected(g)) return {std::move(pc), std::move(g), cfg.pitch, radius};
    radius *= 1.0 + cfg.radius_growth;
  }
  fail(name + ": deployment still disconnected after " +
       std::to_string(cfg.max_retries) + " radius increases");
}

/// Lattice sites in [0, nx) x [0, ny) accepted by `keep`, scaled and jittered.
template <class Keep>
PointCloud jittered_grid_2d(int nx, int ny, int x0, int y0,
                            const GeneratorConfig& cfg, Keep keep) {
  Rng rng(cfg.seed);
  const double j = cfg.jitter * cfg.pitch;
  std::vector<Eigen::VectorXd> pts;
  for (int y = y0; y < y0 + ny; ++y) {
    for (int x = x0; x < x0 + nx; ++x) {
      if (!keep(x, y)) continue;
      Eigen::VectorXd p(2);
      p << x * cfg.pitch + rng.uniform(-j, j), y * cfg.pitch + rng.uniform(-j, j);
      pts.push_back(std::move(p));
    }
  }
  return to_cloud(pts);
}

}  // namespace detail

/// U-shaped region: a width x height block with a notch cut from the top.
struct ConcaveShape {
  int width = 28;
  int height = 24;
  int notch_left = 9;
  int notch_width = 10;
  int notch_depth = 12;
};

inline Network gen_concave_2d(const GeneratorConfig& cfg,
                              const ConcaveShape& s = {}) {
  detail::check_config(cfg);
  detail::require(s.notch_depth < s.height && s.notch_left > 0 &&
                      s.notch_left + s.notch_width < s.width,
                  "notch must leave both arms and the base");
  auto keep = [&](int x, int y) {
    bool in_notch = x >= s.notch_left && x < s.notch_left + s.notch_width &&
                    y >= s.height - s.notch_depth;
    return !in_notch;
  };
  return detail::connect_or_fail(
      detail::jittered_grid_2d(s.width, s.height, 0, 0, cfg, keep), cfg,
      "concave");
}

struct Circle {
  double cx;
  double cy;
  double r;
};

/// Disk with circular holes.
struct CircularShape {
  double radius = 14.0;
  std::vector<Circle> voids{{-6, 3, 3.5}, {5, -4, 3.5}, {3, 7, 2.5}, {-3, -7, 2.5}};
};

inline Network gen_circular_voids_2d(const GeneratorConfig& cfg,
                                     const CircularShape& s = {}) {
  detail::check_config(cfg);
  detail::require(s.radius > 0, "outer radius must be positive");
  const int r = static_cast<int>(std::ceil(s.radius));
  auto keep = [&](int x, int y) {
    if (x * x + y * y > s.radius * s.radius) return false;
    for (const auto& v : s.voids) {
      double dx = x - v.cx, dy = y - v.cy;
      if (dx * dx + dy * dy < v.r * v.r) return false;
    }
    return true;
  };
  return detail::connect_or_fail(
      detail::jittered_grid_2d(2 * r + 1, 2 * r + 1, -r, -r, cfg, keep), cfg,
      "circular");
}

/// side^3 lattice minus an enclosed hourglass (two cones meeting at a waist)
/// around the vertical axis.
struct CubeVoidShape {
  int side = 13;
  double half_height = 5.5;  ///< vertical extent of the void from the center
  double waist_radius = 1.5;
  double end_radius = 6.0;
};

inline Network gen_cube_void_3d(const GeneratorConfig& cfg,
                                const CubeVoidShape& s = {}) {
  detail::check_config(cfg);
  detail::require(s.side >= 3 && s.half_height > 0, "invalid cube shape");
  Rng rng(cfg.seed);
  const double j = cfg.jitter * cfg.pitch;
  const double c = (s.side - 1) / 2.0;
  std::vector<Eigen::VectorXd> pts;
  for (int z = 0; z < s.side; ++z) {
    for (int y = 0; y < s.side; ++y) {
      for (int x = 0; x < s.side; ++x) {
        double rho = std::hypot(x - c, y - c);
        double dz = std::abs(z - c);
        if (dz <= s.half_height &&
            rho < s.waist_radius +
                      (s.end_radius - s.waist_radius) * dz / s.half_height) {
          continue;
        }
        Eigen::VectorXd p(3);
        p << x * cfg.pitch + rng.uniform(-j, j), y * cfg.pitch + rng.uniform(-j, j),
            z * cfg.pitch + rng.uniform(-j, j);
        pts.push_back(std::move(p));
      }
    }
  }
  return detail::connect_or_fail(detail::to_cloud(pts), cfg, "cube-void");
}

/// Two hollow cylinder surfaces: a horizontal bar along x and a stem hanging
/// down from its middle along -z. Each surface loses the sites that fall
/// inside the other cylinder, so the junction is open.
struct TCylinderShape {
  double radius = 4.0;
  int bar_length = 30;
  int stem_length = 25;
};

inline Network gen_t_cylinder_3d(const GeneratorConfig& cfg,
                                 const TCylinderShape& s = {}) {
  detail::check_config(cfg);
  detail::require(s.radius > 0 && s.bar_length > 0 && s.stem_length > 0,
                  "invalid T-cylinder shape");
  Rng rng(cfg.seed);
  const double r = s.radius;
  const int around = static_cast<int>(std::lround(2 * std::numbers::pi * r));
  const double dtheta = 2 * std::numbers::pi / around;
  const double j = cfg.jitter;  // in pitches; lattice below is in pitch units
  std::vector<Eigen::VectorXd> pts;
  auto emit = [&](double x, double y, double z) {
    Eigen::VectorXd p(3);
    p << x * cfg.pitch, y * cfg.pitch, z * cfg.pitch;
    pts.push_back(std::move(p));
  };
  for (int i = 0; i < s.bar_length; ++i) {
    const double x = i - (s.bar_length - 1) / 2.0;
    for (int k = 0; k < around; ++k) {
      const double t = k * dtheta;
      if (r * std::sin(t) < 0 && x * x + std::pow(r * std::cos(t), 2) < r * r) {
        continue;
      }
      const double xj = x + rng.uniform(-j, j);
      const double tj = t + rng.uniform(-j, j) / r;
      emit(xj, r * std::cos(tj), r * std::sin(tj));
    }
  }
  for (int i = 0; i < s.stem_length; ++i) {
    const double z = -(i + 0.5);
    for (int k = 0; k < around; ++k) {
      const double t = k * dtheta;
      if (std::pow(r * std::sin(t), 2) + z * z < r * r) continue;
      const double zj = z + rng.uniform(-j, j);
      const double tj = t + rng.uniform(-j, j) / r;
      emit(r * std::cos(tj), r * std::sin(tj), zj);
    }
  }
  return detail::connect_or_fail(detail::to_cloud(pts), cfg, "t-cylinder");
}

/// Holme-Kim growth: preferential attachment of m edges per new node, each
/// edge after the first replaced by a triad-closing edge with probability
/// p_triad. p_triad = 0 is plain preferential attachment.
inline Graph gen_holme_kim(std::size_t n, std::size_t m, double p_triad,
                           std::uint64_t seed) {
  detail::require(m >= 1 && n > m, "Holme-Kim requires n > m >= 1");
  detail::require(p_triad >= 0 && p_triad <= 1, "p_triad must be in [0, 1]");
  Rng rng(seed);
  std::vector<std::vector<NodeId>> adj(n);
  auto linked = [&](NodeId a, NodeId b) {
    return std::find(adj[a].begin(), adj[a].end(), b) != adj[a].end();
  };
  auto link = [&](NodeId a, NodeId b) {
    if (a == b || linked(a, b)) return;
    adj[a].push_back(b);
    adj[b].push_back(a);
  };
  // Each node appears once per incident edge, plus once for the seed nodes.
  std::vector<NodeId> repeated;
  for (NodeId i = 0; i < m; ++i) repeated.push_back(i);

  std::vector<NodeId> targets;
  std::vector<NodeId> candidates;
  for (NodeId source = m; source < n; ++source) {
    targets.clear();
    while (targets.size() < m) {
      NodeId t = repeated[rng.below(repeated.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
    NodeId target = targets.back();
    targets.pop_back();
    link(source, target);
    repeated.push_back(target);
    for (std::size_t count = 1; count < m; ++count) {
      if (p_triad > 0 && rng.bernoulli(p_triad)) {
        candidates.clear();
        for (NodeId nb : adj[target]) {
          if (nb != source && !linked(source, nb)) candidates.push_back(nb);
        }
        if (!candidates.empty()) {
          NodeId nb = candidates[rng.below(candidates.size())];
          link(source, nb);
          repeated.push_back(nb);
          continue;
        }
      }
      target = targets.back();
      targets.pop_back();
      link(source, target);
      repeated.push_back(target);
    }
    for (std::size_t k = 0; k < m; ++k) repeated.push_back(source);
  }

  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v : adj[u]) {
      if (u < v) pairs.emplace_back(u, v);
    }
  }
  return Graph::from_edge_list(n, pairs);
}

/// Edge list with node ids remapped to [0, n). original_ids[i] is the file id
/// of dense node i; ids are assigned in ascending file-id order.
struct SnapGraph {
  Graph graph;
  std::vector<std::int64_t> original_ids;
  std::size_t self_loops_skipped = 0;
};

/// Parses "i j" lines; '#' lines and blank lines are skipped. Self-loop
/// lines are dropped and counted. Throws DataError on a malformed line or
/// when no edges remain.
inline SnapGraph parse_snap_edge_list(std::istream& in) {
  std::vector<std::pair<std::int64_t, std::int64_t>> raw;
  std::size_t self_loops = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::int64_t a, b;
    std::string extra;
    if (!(ls >> a >> b) || (ls >> extra) || a < 0 || b < 0) {
      detail::fail("malformed edge list line " + std::to_string(lineno) +
                   ": '" + line + "'");
    }
    if (a == b) {
      ++self_loops;
      continue;
    }
    raw.emplace_back(a, b);
  }
  detail::require(!raw.empty(), "edge list contains no edges");

  std::vector<std::int64_t> ids;
  ids.reserve(2 * raw.size());
  for (auto [a, b] : raw) {
    ids.push_back(a);
    ids.push_back(b);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  auto dense = [&](std::int64_t id) {
    return static_cast<NodeId>(std::lower_bound(ids.begin(), ids.end(), id) -
                               ids.begin());
  };
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(raw.size());
  for (auto [a, b] : raw) pairs.emplace_back(dense(a), dense(b));
  SnapGraph out;
  out.graph = Graph::from_edge_list(ids.size(), pairs);
  out.original_ids = std::move(ids);
  out.self_loops_skipped = self_loops;
  return out;
}

inline SnapGraph load_snap_edge_list(const std::string& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), "cannot open edge list '" + path + "'");
  return parse_snap_edge_list(in);
}

/// Induced subgraph; node i of `graph` is node parent_ids[i] of the source.
struct Subgraph {
  Graph graph;
  std::vector<NodeId> parent_ids;
};

/// The first target_n nodes reached by BFS from root, relabeled in BFS
/// order. Every node but the root has its BFS parent among earlier nodes, so
/// the result is connected.
inline Subgraph subgraph_bfs(const Graph& g, NodeId root, std::size_t target_n) {
  detail::require(root < g.node_count(), "subgraph root out of range");
  detail::require(target_n >= 1 && target_n <= g.node_count(),
                  "subgraph size must be in [1, n]");
  std::vector<NodeId> order{root};
  std::vector<NodeId> local(g.node_count(), g.node_count());
  local[root] = 0;
  for (std::size_t head = 0; head < order.size() && order.size() < target_n;
       ++head) {
    for (NodeId v : g.neighbors(order[head])) {
      if (local[v] == g.node_count()) {
        local[v] = order.size();
        order.push_back(v);
        if (order.size() == target_n) break;
      }
    }
  }
  if (order.size() < target_n) {
    detail::fail("component of root has only " + std::to_string(order.size()) +
                 " nodes, fewer than " + std::to_string(target_n));
  }
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (NodeId v : g.neighbors(order[i])) {
      std::size_t lv = local[v];
      if (lv < order.size() && i < lv) pairs.emplace_back(i, lv);
    }
  }
  return {Graph::from_edge_list(order.size(), pairs), std::move(order)};
}

}  // namespace hoptopo
