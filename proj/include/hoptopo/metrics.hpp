#pragma once

// Recovery error metrics: map distance error E, topology preservation error
// E_TP, and the hop-distance-matrix errors E_m and E_a.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hoptopo/error.hpp"
#include "hoptopo/graph.hpp"
#include "hoptopo/netgen.hpp"
#include "hoptopo/tpm.hpp"

namespace hoptopo {

/// Euclidean distance on the map from every node to every anchor (n x M).
/// This is the single place that decides which pairs E compares; an
/// all-pairs variant would pass every node as an "anchor".
inline Eigen::MatrixXd map_distances(const TopologyMap& map,
                                     std::span<const NodeId> anchors) {
  Eigen::MatrixXd d(map.coords.rows(), static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    detail::require(anchors[j] < map.size(), "anchor outside the map");
    const Eigen::RowVectorXd a = map.coords.row(static_cast<Eigen::Index>(anchors[j]));
    d.col(static_cast<Eigen::Index>(j)) = (map.coords.rowwise() - a).rowwise().norm();
  }
  return d;
}

/// E = sum |d_ij(f) - d_ij(0)| / sum d_ij(0) over nodes i and anchors j.
inline double mean_distance_error(const TopologyMap& tpm_f, const TopologyMap& tpm_0,
                                  std::span<const NodeId> anchors) {
  detail::require(tpm_f.size() == tpm_0.size() && tpm_f.dims() == tpm_0.dims(),
                  "maps must have equal shape");
  const Eigen::MatrixXd df = map_distances(tpm_f, anchors);
  const Eigen::MatrixXd d0 = map_distances(tpm_0, anchors);
  const double denom = d0.sum();
  if (!(denom > 0)) detail::fail("baseline map is degenerate (zero distances)");
  return (df - d0).cwiseAbs().sum() / denom;
}

struct ScanLineConfig {
  double bin_width = 1.0;  ///< layout units; nodes sharing a rounded coordinate share a line
  bool horizontal = true;
  bool vertical = true;
};

namespace detail {

struct ScanLine {
  int axis;                      ///< layout axis the line runs along
  std::vector<std::size_t> nodes;
};

inline std::vector<ScanLine> scan_lines(const PointCloud& layout,
                                        const ScanLineConfig& cfg) {
  std::vector<ScanLine> lines;
  auto bin = [&](int along) {
    const int across = 1 - along;
    std::map<long long, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < layout.size(); ++i) {
      double c = layout.coords(static_cast<Eigen::Index>(i), across) / cfg.bin_width;
      groups[std::llround(c)].push_back(i);
    }
    for (auto& [key, nodes] : groups) {
      if (nodes.size() >= 2) lines.push_back({along, std::move(nodes)});
    }
  };
  if (cfg.horizontal) bin(0);
  if (cfg.vertical) bin(1);
  return lines;
}

/// Out-of-order ordered pairs along one line.
inline std::size_t inversions(const PointCloud& layout, const Eigen::MatrixXd& map,
                              const ScanLine& line, int map_axis, double sign) {
  std::size_t bad = 0;
  const auto& v = line.nodes;
  for (std::size_t a = 0; a < v.size(); ++a) {
    for (std::size_t b = a + 1; b < v.size(); ++b) {
      const auto i = static_cast<Eigen::Index>(v[a]);
      const auto j = static_cast<Eigen::Index>(v[b]);
      double orig = layout.coords(i, line.axis) - layout.coords(j, line.axis);
      double proj = sign * (map(i, map_axis) - map(j, map_axis));
      if (orig * proj < 0) bad += 2;
    }
  }
  return bad;
}

}  // namespace detail

/// Fraction of out-of-order node pairs along horizontal and vertical scan
/// lines of the original layout, comparing each line's order with the
/// projection of its nodes onto the matching map axis. The map is tried
/// under all 8 axis swaps and sign flips; the smallest error is returned.
inline double topology_preservation_error(const PointCloud& layout,
                                          const TopologyMap& tpm,
                                          const ScanLineConfig& cfg = {}) {
  detail::require(layout.dims() == 2 && tpm.dims() == 2,
                  "topology preservation error is defined for 2-D maps");
  detail::require(layout.size() == tpm.size(), "layout and map sizes differ");
  detail::require(cfg.bin_width > 0, "scan-line bin width must be positive");
  const auto lines = detail::scan_lines(layout, cfg);
  detail::require(!lines.empty(), "no scan line holds two or more nodes");

  double total = 0;
  for (const auto& l : lines) {
    const double m = static_cast<double>(l.nodes.size());
    total += m * (m - 1);
  }
  double best = std::numeric_limits<double>::infinity();
  for (int swap = 0; swap < 2; ++swap) {
    for (int flip = 0; flip < 4; ++flip) {
      const std::array<double, 2> sign{flip & 1 ? -1.0 : 1.0, flip & 2 ? -1.0 : 1.0};
      std::size_t bad = 0;
      for (const auto& l : lines) {
        // Layout axis `l.axis` is compared with map axis `l.axis` (or the
        // other one when swapped).
        const int map_axis = swap ? 1 - l.axis : l.axis;
        bad += detail::inversions(layout, tpm.coords, l, map_axis, sign[l.axis]);
      }
      best = std::min(best, static_cast<double>(bad) / total);
    }
  }
  return best;
}

namespace detail {

inline double hdm_abs_diff(const Eigen::MatrixXd& h_hat, const HopDistanceMatrix& h) {
  require(static_cast<std::size_t>(h_hat.rows()) == h.size() &&
              static_cast<std::size_t>(h_hat.cols()) == h.size(),
          "estimate and hop-distance matrix differ in size");
  return (h_hat - h.to_dense()).cwiseAbs().sum();
}

}  // namespace detail

/// E_m = sum |h_hat - h| / sum h.
inline double hdm_mean_error(const Eigen::MatrixXd& h_hat, const HopDistanceMatrix& h) {
  const double diff = detail::hdm_abs_diff(h_hat, h);
  const double denom = h.sum();
  if (!(denom > 0)) detail::fail("hop-distance matrix sums to zero");
  return diff / denom;
}

/// E_a = sum |h_hat - h| / N^2, in hops.
inline double hdm_absolute_error(const Eigen::MatrixXd& h_hat, const HopDistanceMatrix& h) {
  const double diff = detail::hdm_abs_diff(h_hat, h);
  const double n = static_cast<double>(h.size());
  return diff / (n * n);
}

struct MetricReport {
  std::string network;
  std::string procedure;
  std::size_t anchors = 0;
  double fraction = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0;
};

}  // namespace hoptopo
