#pragma once

// Plain-text formats: SNAP edge lists, layout/map CSVs, dense matrix CSVs,
// ObservedMatrix CSV + JSON sidecar, metric rows. Numbers are written in
// shortest round-trip form so repeated runs produce identical bytes.

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"  // vendored nlohmann/json

#include "hoptopo/error.hpp"
#include "hoptopo/graph.hpp"
#include "hoptopo/metrics.hpp"
#include "hoptopo/netgen.hpp"
#include "hoptopo/sampling.hpp"
#include "hoptopo/tpm.hpp"

namespace hoptopo::io {

inline std::string fmt(double v) {
  if (v == 0) return "0";  // folds -0
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) detail::fail("number formatting failed");
  return {buf, end};
}

inline double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) {
    detail::fail("line " + std::to_string(lineno) + ": bad number '" + s + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline bool is_comment_or_blank(const std::string& line) {
  auto p = line.find_first_not_of(" \t\r");
  return p == std::string::npos || line[p] == '#';
}

inline bool looks_numeric(const std::string& cell) {
  auto p = cell.find_first_not_of(" \t");
  if (p == std::string::npos) return false;
  char c = cell[p];
  return (c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.';
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  detail::require(static_cast<bool>(out), "cannot write '" + path + "'");
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  detail::require(static_cast<bool>(in), "cannot open '" + path + "'");
  return in;
}

// --- edge lists -----------------------------------------------------------

inline void write_edge_list(std::ostream& out, const Graph& g) {
  out << "# Undirected graph\n# Nodes: " << g.node_count()
      << " Edges: " << g.edge_count() << "\n# FromNodeId\tToNodeId\n";
  for (auto e : g.edges()) out << e.u << '\t' << e.v << '\n';
}

/// dense_id,original_id
inline void write_node_map(std::ostream& out, std::span<const std::int64_t> original) {
  out << "dense_id,original_id\n";
  for (std::size_t i = 0; i < original.size(); ++i) out << i << ',' << original[i] << '\n';
}

// --- point sets (layouts and maps) ----------------------------------------

/// node_id,x,y[,z]
inline void write_points(std::ostream& out, const Eigen::MatrixXd& pts) {
  static const char* names[] = {"x", "y", "z"};
  out << "node_id";
  for (Eigen::Index c = 0; c < pts.cols(); ++c) out << ',' << (c < 3 ? names[c] : "w");
  out << '\n';
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    out << i;
    for (Eigen::Index c = 0; c < pts.cols(); ++c) out << ',' << fmt(pts(i, c));
    out << '\n';
  }
}

/// Reads node_id,x,y[,z]; rows must be in node order 0..n-1.
inline Eigen::MatrixXd read_points(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    auto cells = split_csv(line);
    if (!looks_numeric(cells[0])) continue;  // header
    detail::require(cells.size() >= 3, "line " + std::to_string(lineno) +
                                           ": expected node_id and 2-3 coordinates");
    auto id = static_cast<std::size_t>(parse_double(cells[0], lineno));
    detail::require(id == rows.size(), "line " + std::to_string(lineno) +
                                           ": node ids must be consecutive from 0");
    std::vector<double> r;
    for (std::size_t c = 1; c < cells.size(); ++c) r.push_back(parse_double(cells[c], lineno));
    if (!rows.empty()) {
      detail::require(r.size() == rows[0].size(),
                      "line " + std::to_string(lineno) + ": ragged coordinates");
    }
    rows.push_back(std::move(r));
  }
  detail::require(!rows.empty(), "no points in file");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
  }
  return m;
}

// --- dense matrices ---------------------------------------------------------

inline void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << fmt(m(i, j));
    }
    out << '\n';
  }
}

/// Headerless comma-separated rows; '#' lines skipped.
inline Eigen::MatrixXd read_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    std::vector<double> r;
    for (const auto& c : split_csv(line)) r.push_back(parse_double(c, lineno));
    if (!rows.empty()) {
      detail::require(r.size() == rows[0].size(),
                      "line " + std::to_string(lineno) + ": ragged matrix row");
    }
    rows.push_back(std::move(r));
  }
  detail::require(!rows.empty(), "empty matrix file");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// --- observed matrices --------------------------------------------------------

inline const char* to_string(ObservationMode m) {
  return m == ObservationMode::kSymmetric ? "symmetric" : "general";
}

inline ObservationMode parse_mode(const std::string& s) {
  if (s == "symmetric") return ObservationMode::kSymmetric;
  if (s == "general") return ObservationMode::kGeneral;
  detail::fail("unknown observation mode '" + s + "'");
}

inline nlohmann::json observation_header(const ObservedMatrix& o) {
  return {{"rows", o.rows()},     {"cols", o.cols()},
          {"mode", to_string(o.mode)}, {"seed", o.seed},
          {"observed", o.observed()}, {"anchors", o.anchors}};
}

/// row,col,value for every observed cell, column-major order.
inline void write_observation_cells(std::ostream& out, const ObservedMatrix& o) {
  out << "row,col,value\n";
  for (Eigen::Index j = 0; j < o.values.cols(); ++j) {
    for (Eigen::Index i = 0; i < o.values.rows(); ++i) {
      if (o.mask(i, j)) out << i << ',' << j << ',' << fmt(o.values(i, j)) << '\n';
    }
  }
}

inline ObservedMatrix read_observations(std::istream& cells, const nlohmann::json& header) {
  ObservedMatrix o;
  std::size_t rows = 0, cols = 0;
  try {
    rows = header.at("rows").get<std::size_t>();
    cols = header.at("cols").get<std::size_t>();
    o.mode = parse_mode(header.at("mode").get<std::string>());
    o.seed = header.value("seed", std::uint64_t{0});
    o.anchors = header.value("anchors", std::vector<NodeId>{});
  } catch (const nlohmann::json::exception& e) {
    detail::fail(std::string("bad observation header: ") + e.what());
  }
  o.values = Eigen::MatrixXd::Zero(rows, cols);
  o.mask = Mask::Constant(rows, cols, false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(cells, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    auto c = split_csv(line);
    if (!looks_numeric(c[0])) continue;
    detail::require(c.size() == 3, "line " + std::to_string(lineno) + ": expected row,col,value");
    double ri = parse_double(c[0], lineno), ci = parse_double(c[1], lineno);
    detail::require(ri >= 0 && ci >= 0 && ri < rows && ci < cols,
                    "line " + std::to_string(lineno) + ": cell outside matrix");
    auto r = static_cast<Eigen::Index>(ri), k = static_cast<Eigen::Index>(ci);
    o.values(r, k) = parse_double(c[2], lineno);
    o.mask(r, k) = true;
  }
  if (header.contains("observed")) {
    detail::require(header["observed"].get<std::size_t>() == o.observed(),
                    "observation count does not match header");
  }
  return o;
}

/// <prefix>.csv holds the cells, <prefix>.json the header.
inline void save_observations(const std::string& prefix, const ObservedMatrix& o) {
  auto csv = open_out(prefix + ".csv");
  write_observation_cells(csv, o);
  auto js = open_out(prefix + ".json");
  js << observation_header(o).dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    detail::fail("bad JSON in '" + path + "': " + e.what());
  }
}

inline ObservedMatrix load_observations(const std::string& prefix) {
  auto header = read_json(prefix + ".json");
  auto csv = open_in(prefix + ".csv");
  return read_observations(csv, header);
}

// --- metric rows ------------------------------------------------------------

inline constexpr const char* kMetricHeader = "network,procedure,M,f,seed,metric,value";

inline void write_metric_row(std::ostream& out, const MetricReport& r) {
  out << r.network << ',' << r.procedure << ',' << r.anchors << ',' << fmt(r.fraction)
      << ',' << r.seed << ',' << r.metric << ',' << fmt(r.value) << '\n';
}

}  // namespace hoptopo::io
