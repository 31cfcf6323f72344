#pragma once

// Partially observed matrices: anchor-based virtual coordinates with random
// deletions, and random symmetric samples of the full hop-distance matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hoptopo/error.hpp"
#include "hoptopo/graph.hpp"
#include "hoptopo/rng.hpp"

namespace hoptopo {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class ObservationMode {
  kGeneral,    ///< rectangular, e.g. a VC matrix
  kSymmetric,  ///< square and mirrored, diagonal observed as 0
};

/// Values on a mask. Entries outside the mask are stored as 0 and carry no
/// meaning.
struct ObservedMatrix {
  Eigen::MatrixXd values;
  Mask mask;
  ObservationMode mode = ObservationMode::kGeneral;
  std::uint64_t seed = 0;
  std::vector<NodeId> anchors;  ///< column -> anchor node (VC mode only)

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t observed() const { return static_cast<std::size_t>(mask.count()); }
  bool fully_observed() const { return mask.all(); }

  static ObservedMatrix full(const Eigen::MatrixXd& m,
                             ObservationMode mode = ObservationMode::kGeneral) {
    return {m, Mask::Constant(m.rows(), m.cols(), true), mode, 0, {}};
  }
};

struct MaskReport {
  std::vector<std::size_t> empty_rows;
  std::vector<std::size_t> empty_cols;
  std::size_t asymmetric_cells = 0;   ///< symmetric mode only
  std::size_t missing_diagonal = 0;   ///< symmetric mode only
  std::size_t non_finite = 0;
  double coverage = 0.0;              ///< |mask| / (rows * cols)

  bool ok() const {
    return empty_rows.empty() && empty_cols.empty() && asymmetric_cells == 0 &&
           missing_diagonal == 0 && non_finite == 0 && coverage > 0;
  }

  std::string summary() const {
    std::string s = "coverage=" + std::to_string(coverage) +
                    " empty_rows=" + std::to_string(empty_rows.size()) +
                    " empty_cols=" + std::to_string(empty_cols.size()) +
                    " asymmetric=" + std::to_string(asymmetric_cells) +
                    " missing_diag=" + std::to_string(missing_diagonal) +
                    " non_finite=" + std::to_string(non_finite);
    if (!empty_rows.empty()) s += " first_empty_row=" + std::to_string(empty_rows[0]);
    return s;
  }
};

inline MaskReport validate_mask(const ObservedMatrix& o) {
  MaskReport r;
  const auto rows = o.values.rows(), cols = o.values.cols();
  if (o.mask.rows() != rows || o.mask.cols() != cols) {
    detail::fail("mask and values differ in shape");
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!o.mask.row(i).any()) r.empty_rows.push_back(static_cast<std::size_t>(i));
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (!o.mask.col(j).any()) r.empty_cols.push_back(static_cast<std::size_t>(j));
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (o.mask(i, j) && !std::isfinite(o.values(i, j))) ++r.non_finite;
    }
  }
  if (o.mode == ObservationMode::kSymmetric) {
    if (rows != cols) {
      r.asymmetric_cells = static_cast<std::size_t>(rows * cols);
    } else {
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!o.mask(i, i) || o.values(i, i) != 0) ++r.missing_diagonal;
        for (Eigen::Index j = i + 1; j < cols; ++j) {
          if (o.mask(i, j) != o.mask(j, i) ||
              (o.mask(i, j) && o.values(i, j) != o.values(j, i))) {
            r.asymmetric_cells += 2;
          }
        }
      }
    }
  }
  const double cells = static_cast<double>(rows) * static_cast<double>(cols);
  r.coverage = cells > 0 ? static_cast<double>(o.observed()) / cells : 0.0;
  return r;
}

enum class AnchorStrategy { kRandom, kDegree, kCloseness, kBetweenness };

struct AnchorSelection {
  AnchorStrategy strategy = AnchorStrategy::kRandom;
  std::size_t m = 20;
  std::uint64_t seed = 1;
};

/// Shortest-path betweenness (Brandes, unweighted), each unordered pair
/// counted once.
inline std::vector<double> betweenness_centrality(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<double> cb(n, 0.0), sigma(n), delta(n);
  std::vector<std::int64_t> dist(n);
  std::vector<NodeId> order;
  order.reserve(n);
  for (NodeId s = 0; s < n; ++s) {
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    order.clear();
    sigma[s] = 1;
    dist[s] = 0;
    order.push_back(s);
    for (std::size_t head = 0; head < order.size(); ++head) {
      NodeId v = order[head];
      for (NodeId w : g.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          order.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (std::size_t k = order.size(); k-- > 1;) {
      NodeId w = order[k];
      for (NodeId v : g.neighbors(w)) {
        if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1 + delta[w]);
      }
      cb[w] += delta[w];
    }
  }
  for (double& c : cb) c /= 2;
  return cb;
}

/// 1 / (sum of hops to all other nodes). Requires a connected graph.
inline std::vector<double> closeness_centrality(const Graph& g) {
  std::vector<double> c(g.node_count(), 0.0);
  for (NodeId s = 0; s < g.node_count(); ++s) {
    double total = 0;
    for (Hop h : bfs_hops(g, s)) {
      if (h == kUnreachable) detail::fail("closeness requires a connected graph");
      total += h;
    }
    c[s] = total > 0 ? 1.0 / total : 0.0;
  }
  return c;
}

namespace detail {

/// The m highest-scoring nodes, ties by ascending index. Scores are rounded
/// to 12 significant digits first so that floating-point noise between
/// symmetric nodes does not decide the order.
inline std::vector<NodeId> top_m(const std::vector<double>& score, std::size_t m) {
  auto key = [](double v) {
    if (v == 0) return 0.0;
    double mag = std::pow(10.0, 11 - std::floor(std::log10(std::abs(v))));
    return std::round(v * mag) / mag;
  };
  std::vector<double> k(score.size());
  std::transform(score.begin(), score.end(), k.begin(), key);
  std::vector<NodeId> idx(score.size());
  std::iota(idx.begin(), idx.end(), NodeId{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](NodeId a, NodeId b) { return k[a] > k[b]; });
  idx.resize(m);
  return idx;
}

}  // namespace detail

inline std::vector<NodeId> select_anchors(const Graph& g, const AnchorSelection& sel) {
  const std::size_t n = g.node_count();
  detail::require(sel.m >= 1, "anchor count must be at least 1");
  detail::require(sel.m <= n, "anchor count " + std::to_string(sel.m) +
                                  " exceeds node count " + std::to_string(n));
  switch (sel.strategy) {
    case AnchorStrategy::kRandom: {
      Rng rng(sel.seed);
      return rng.sample_without_replacement(n, sel.m);
    }
    case AnchorStrategy::kDegree: {
      std::vector<double> d(n);
      for (NodeId u = 0; u < n; ++u) d[u] = static_cast<double>(g.degree(u));
      return detail::top_m(d, sel.m);
    }
    case AnchorStrategy::kCloseness:
      return detail::top_m(closeness_centrality(g), sel.m);
    case AnchorStrategy::kBetweenness:
      return detail::top_m(betweenness_centrality(g), sel.m);
  }
  detail::fail("unknown anchor strategy");
}

namespace detail {

inline std::size_t floor_count(double fraction, std::size_t total) {
  // The epsilon keeps e.g. 0.6 * 11000 from landing on 6599.
  return static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(total) + 1e-9));
}

}  // namespace detail

/// Deletes floor(f * N * M) uniformly chosen cells of P. A deletion that
/// would empty a row is moved to another row; the deletion count is exact.
inline ObservedMatrix vc_observations(const VcMatrix& p, double delete_fraction,
                                      std::uint64_t seed) {
  detail::require(delete_fraction >= 0 && delete_fraction < 1,
                  "delete fraction must be in [0, 1)");
  const std::size_t n = p.rows(), m = p.cols();
  detail::require(n > 0 && m > 0, "empty VC matrix");
  const std::size_t total = n * m;
  const std::size_t k = detail::floor_count(delete_fraction, total);
  if (k > total - n) {
    detail::fail("deleting " + std::to_string(k) + " of " + std::to_string(total) +
                 " cells cannot leave every row observed");
  }

  ObservedMatrix o;
  o.values = p.to_dense();
  o.mask = Mask::Constant(n, m, true);
  o.mode = ObservationMode::kGeneral;
  o.seed = seed;
  o.anchors = p.anchors();

  Rng rng(seed);
  std::vector<std::size_t> row_count(n, m);
  for (std::size_t cell : rng.sample_without_replacement(total, k)) {
    o.mask(cell / m, cell % m) = false;
    --row_count[cell / m];
  }

  std::size_t budget = 100 * n;
  for (std::size_t r = 0; r < n; ++r) {
    if (row_count[r] > 0) continue;
    // Restore one cell here, then delete a cell from a row that can spare it.
    const std::size_t c = rng.below(m);
    o.mask(r, c) = true;
    row_count[r] = 1;
    for (;;) {
      if (budget-- == 0) detail::fail("row-coverage repair exhausted its retries");
      std::size_t cell = rng.below(total);
      std::size_t rr = cell / m, cc = cell % m;
      if (rr == r || !o.mask(rr, cc) || row_count[rr] < 2) continue;
      o.mask(rr, cc) = false;
      --row_count[rr];
      break;
    }
  }
  o.values = o.mask.select(o.values, 0.0);
  return o;
}

namespace detail {

/// Unordered pair index -> (i, j), i < j, pairs enumerated row by row.
inline std::pair<std::size_t, std::size_t> unrank_pair(std::size_t idx,
                                                       std::size_t n) {
  // Row i owns n - 1 - i pairs.
  std::size_t i = 0;
  std::size_t lo = 0, hi = n - 1;
  auto start = [n](std::size_t r) { return r * (2 * n - r - 1) / 2; };
  while (lo < hi) {
    std::size_t mid = (lo + hi + 1) / 2;
    if (start(mid) <= idx) lo = mid; else hi = mid - 1;
  }
  i = lo;
  return {i, i + 1 + (idx - start(i))};
}

}  // namespace detail

/// Observes a random symmetric subset of H: the diagonal plus about
/// observe_fraction of the off-diagonal pairs, mirrored. Every row keeps at
/// least one off-diagonal observation.
inline ObservedMatrix random_entry_observations(const HopDistanceMatrix& h,
                                                double observe_fraction,
                                                std::uint64_t seed) {
  detail::require(observe_fraction > 0 && observe_fraction <= 1,
                  "observe fraction must be in (0, 1]");
  const std::size_t n = h.size();
  detail::require(n >= 2, "need at least two nodes");
  const Eigen::MatrixXd dense = h.to_dense();
  const std::size_t pairs = n * (n - 1) / 2;
  const double want = (observe_fraction * static_cast<double>(n) * n - n) / 2;
  const std::size_t k = std::min<std::size_t>(
      pairs, static_cast<std::size_t>(std::max(0.0, std::round(want))));
  if (2 * k < n) {
    detail::fail("observe fraction " + std::to_string(observe_fraction) +
                 " is too small to cover every row");
  }

  ObservedMatrix o;
  o.mode = ObservationMode::kSymmetric;
  o.seed = seed;
  o.mask = Mask::Constant(n, n, false);
  o.mask.matrix().diagonal().setConstant(true);
  std::vector<std::size_t> row_count(n, 0);

  Rng rng(seed);
  auto set_pair = [&](std::size_t i, std::size_t j, bool on) {
    o.mask(i, j) = o.mask(j, i) = on;
    if (on) {
      ++row_count[i];
      ++row_count[j];
    } else {
      --row_count[i];
      --row_count[j];
    }
  };
  for (std::size_t idx : rng.sample_without_replacement(pairs, k)) {
    auto [i, j] = detail::unrank_pair(idx, n);
    set_pair(i, j, true);
  }

  std::size_t budget = 100 * n;
  for (std::size_t r = 0; r < n; ++r) {
    if (row_count[r] > 0) continue;
    std::size_t other = rng.below(n - 1);
    if (other >= r) ++other;
    set_pair(r, other, true);
    if (k == pairs) continue;
    for (;;) {
      if (budget-- == 0) detail::fail("row-coverage repair exhausted its retries");
      auto [i, j] = detail::unrank_pair(rng.below(pairs), n);
      if (!o.mask(i, j) || row_count[i] < 2 || row_count[j] < 2) continue;
      set_pair(i, j, false);
      break;
    }
  }
  o.values = o.mask.select(dense, 0.0);
  return o;
}

}  // namespace hoptopo
