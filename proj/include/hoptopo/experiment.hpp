#pragma once

// Monte-Carlo experiment driver: build a network once, then for every
// (fraction, repeat) cell sample, complete, build maps and score them.
//
// Run r draws everything from derive_seed(seed, r): its anchors come from
// sub-stream 0 and the deletions for fraction index i from sub-stream i + 1,
// so a repeat uses the same anchors at every fraction. Results are ordered
// by (fraction, repeat) whatever order the workers finish in.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"  // vendored nlohmann/json

#include "hoptopo/error.hpp"
#include "hoptopo/graph.hpp"
#include "hoptopo/io.hpp"
#include "hoptopo/lowrank.hpp"
#include "hoptopo/metrics.hpp"
#include "hoptopo/netgen.hpp"
#include "hoptopo/rng.hpp"
#include "hoptopo/sampling.hpp"
#include "hoptopo/tpm.hpp"

namespace hoptopo {

struct NetworkSpec {
  /// concave | circular | cube | t-cylinder | holme-kim | snap
  std::string generator = "circular";
  GeneratorConfig gen;
  std::size_t n = 500;     ///< holme-kim
  std::size_t m = 3;       ///< holme-kim edges per new node
  double p_triad = 0.5;    ///< holme-kim
  std::string edge_list;   ///< snap
  std::size_t subgraph = 0;  ///< snap: BFS subgraph size, 0 = whole graph
  NodeId root = 0;         ///< snap: BFS root (dense id)
};

enum class SamplingMode {
  kVc,           ///< anchors, P, deletions; scored with E and E_TP
  kRandomEntry,  ///< symmetric sample of H; scored with E_m and E_a
};

struct ExperimentConfig {
  NetworkSpec network;
  SamplingMode mode = SamplingMode::kVc;
  AnchorSelection anchors;
  std::vector<double> fractions{0.1, 0.2, 0.4, 0.6, 0.8};  ///< deletion fractions
  std::vector<TpmProcedure> procedures{TpmProcedure::kGrammian, TpmProcedure::kPCompletion};
  std::size_t k = 2;
  std::size_t repeats = 100;
  std::uint64_t seed = 1;
  CompletionConfig completion;
  double bin_width = 0;      ///< scan-line pitch; 0 = network pitch
  std::size_t threads = 0;   ///< 0 = hardware concurrency
  bool write_maps = true;    ///< TPM CSVs for repeat 0
};

inline const char* to_string(TpmProcedure p) {
  return p == TpmProcedure::kGrammian ? "grammian" : "p-completion";
}

inline TpmProcedure parse_procedure(const std::string& s) {
  if (s == "grammian") return TpmProcedure::kGrammian;
  if (s == "p-completion") return TpmProcedure::kPCompletion;
  detail::fail("unknown procedure '" + s + "' (grammian | p-completion)");
}

inline const char* to_string(AnchorStrategy s) {
  switch (s) {
    case AnchorStrategy::kRandom: return "random";
    case AnchorStrategy::kDegree: return "degree";
    case AnchorStrategy::kCloseness: return "closeness";
    case AnchorStrategy::kBetweenness: return "betweenness";
  }
  return "?";
}

inline AnchorStrategy parse_strategy(const std::string& s) {
  if (s == "random") return AnchorStrategy::kRandom;
  if (s == "degree") return AnchorStrategy::kDegree;
  if (s == "closeness") return AnchorStrategy::kCloseness;
  if (s == "betweenness") return AnchorStrategy::kBetweenness;
  detail::fail("unknown anchor strategy '" + s + "'");
}

inline const char* to_string(SamplingMode m) {
  return m == SamplingMode::kVc ? "vc" : "random-entry";
}

inline SamplingMode parse_sampling_mode(const std::string& s) {
  if (s == "vc") return SamplingMode::kVc;
  if (s == "random-entry") return SamplingMode::kRandomEntry;
  detail::fail("unknown sampling mode '" + s + "' (vc | random-entry)");
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json procs = nlohmann::json::array();
  for (auto p : c.procedures) procs.push_back(to_string(p));
  return {
      {"network",
       {{"generator", c.network.generator},
        {"seed", c.network.gen.seed},
        {"pitch", c.network.gen.pitch},
        {"jitter", c.network.gen.jitter},
        {"radius_factor", c.network.gen.radius_factor},
        {"n", c.network.n},
        {"m", c.network.m},
        {"p_triad", c.network.p_triad},
        {"edge_list", c.network.edge_list},
        {"subgraph", c.network.subgraph},
        {"root", c.network.root}}},
      {"mode", to_string(c.mode)},
      {"anchors", {{"strategy", to_string(c.anchors.strategy)}, {"m", c.anchors.m}}},
      {"fractions", c.fractions},
      {"procedures", procs},
      {"k", c.k},
      {"repeats", c.repeats},
      {"seed", c.seed},
      {"completion",
       {{"tolerance", c.completion.tolerance},
        {"max_iters", c.completion.max_iters},
        {"penalty_growth", c.completion.penalty_growth}}},
      {"bin_width", c.bin_width},
      {"threads", c.threads},
      {"write_maps", c.write_maps},
  };
}

/// Fields absent from `j` keep the values already in `c`.
inline void merge_json(ExperimentConfig& c, const nlohmann::json& j) {
  try {
    if (j.contains("network")) {
      const auto& n = j["network"];
      c.network.generator = n.value("generator", c.network.generator);
      c.network.gen.seed = n.value("seed", c.network.gen.seed);
      c.network.gen.pitch = n.value("pitch", c.network.gen.pitch);
      c.network.gen.jitter = n.value("jitter", c.network.gen.jitter);
      c.network.gen.radius_factor = n.value("radius_factor", c.network.gen.radius_factor);
      c.network.n = n.value("n", c.network.n);
      c.network.m = n.value("m", c.network.m);
      c.network.p_triad = n.value("p_triad", c.network.p_triad);
      c.network.edge_list = n.value("edge_list", c.network.edge_list);
      c.network.subgraph = n.value("subgraph", c.network.subgraph);
      c.network.root = n.value("root", c.network.root);
    }
    if (j.contains("mode")) c.mode = parse_sampling_mode(j["mode"].get<std::string>());
    if (j.contains("anchors")) {
      const auto& a = j["anchors"];
      if (a.contains("strategy")) c.anchors.strategy = parse_strategy(a["strategy"].get<std::string>());
      c.anchors.m = a.value("m", c.anchors.m);
    }
    if (j.contains("fractions")) c.fractions = j["fractions"].get<std::vector<double>>();
    if (j.contains("procedures")) {
      c.procedures.clear();
      for (const auto& p : j["procedures"]) c.procedures.push_back(parse_procedure(p.get<std::string>()));
    }
    c.k = j.value("k", c.k);
    c.repeats = j.value("repeats", c.repeats);
    c.seed = j.value("seed", c.seed);
    if (j.contains("completion")) {
      const auto& m = j["completion"];
      c.completion.tolerance = m.value("tolerance", c.completion.tolerance);
      c.completion.max_iters = m.value("max_iters", c.completion.max_iters);
      c.completion.penalty_growth = m.value("penalty_growth", c.completion.penalty_growth);
    }
    c.bin_width = j.value("bin_width", c.bin_width);
    c.threads = j.value("threads", c.threads);
    c.write_maps = j.value("write_maps", c.write_maps);
  } catch (const nlohmann::json::exception& e) {
    detail::fail(std::string("bad experiment config: ") + e.what());
  }
}

inline void validate(const ExperimentConfig& c) {
  detail::require(c.repeats >= 1, "repeats must be at least 1");
  detail::require(!c.fractions.empty(), "no fractions given");
  for (double f : c.fractions) {
    detail::require(f >= 0 && f < 1, "fractions must be in [0, 1)");
  }
  detail::require(c.mode == SamplingMode::kRandomEntry || !c.procedures.empty(),
                  "no procedures given");
  detail::require(c.k == 2 || c.k == 3, "k must be 2 or 3");
}

/// Network plus what the experiment needs to know about it.
struct BuiltNetwork {
  std::string name;
  Graph graph;
  std::optional<PointCloud> layout;  ///< sensor deployments only
  double pitch = 1.0;
  std::vector<std::int64_t> original_ids;  ///< snap: dense -> file id
};

inline BuiltNetwork build_network(const NetworkSpec& spec) {
  BuiltNetwork b;
  b.name = spec.generator;
  auto from = [&](Network net) {
    b.graph = std::move(net.graph);
    b.layout = std::move(net.layout);
    b.pitch = net.pitch;
  };
  const auto& g = spec.generator;
  if (g == "concave") from(gen_concave_2d(spec.gen));
  else if (g == "circular") from(gen_circular_voids_2d(spec.gen));
  else if (g == "cube") from(gen_cube_void_3d(spec.gen));
  else if (g == "t-cylinder") from(gen_t_cylinder_3d(spec.gen));
  else if (g == "holme-kim") b.graph = gen_holme_kim(spec.n, spec.m, spec.p_triad, spec.gen.seed);
  else if (g == "snap") {
    detail::require(!spec.edge_list.empty(), "snap network needs an edge list path");
    SnapGraph s = load_snap_edge_list(spec.edge_list);
    if (spec.subgraph > 0) {
      Subgraph sub = subgraph_bfs(s.graph, spec.root, spec.subgraph);
      b.graph = std::move(sub.graph);
      for (NodeId p : sub.parent_ids) b.original_ids.push_back(s.original_ids[p]);
    } else {
      b.graph = std::move(s.graph);
      b.original_ids = std::move(s.original_ids);
    }
  } else {
    detail::fail("unknown network generator '" + g + "'");
  }
  return b;
}

struct CellSummary {
  std::string procedure;
  double fraction;
  std::string metric;
  double mean;
  double stddev;
  std::size_t runs;
};

struct RunFailure {
  double fraction;
  std::size_t repeat;
  std::string procedure;
  std::string message;
};

struct ExperimentResult {
  std::string network;
  std::vector<MetricReport> rows;
  std::vector<CellSummary> cells;
  std::vector<RunFailure> failures;
  std::size_t total_runs = 0;

  double failure_rate() const {
    return total_runs ? static_cast<double>(failures.size()) / total_runs : 0.0;
  }

  /// Mean of `metric` for (procedure, fraction); NaN if absent.
  double mean(const std::string& procedure, double fraction, const std::string& metric) const {
    for (const auto& c : cells) {
      if (c.procedure == procedure && c.fraction == fraction && c.metric == metric) return c.mean;
    }
    return std::nan("");
  }
};

namespace detail {

struct TaskOutput {
  std::vector<MetricReport> rows;
  std::vector<RunFailure> failures;
  std::vector<std::pair<std::string, TopologyMap>> maps;  ///< repeat 0 only
  std::size_t runs = 0;
};

inline std::vector<CellSummary> summarize(const std::vector<MetricReport>& rows) {
  std::map<std::tuple<std::string, double, std::string>, std::vector<double>> groups;
  std::vector<std::tuple<std::string, double, std::string>> order;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.procedure, r.fraction, r.metric);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(r.value);
  }
  std::vector<CellSummary> out;
  for (const auto& key : order) {
    const auto& v = groups[key];
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0;
    for (double x : v) var += (x - mean) * (x - mean);
    double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), mean, sd, v.size()});
  }
  return out;
}

}  // namespace detail

/// Runs the experiment; writes CSVs into `out_dir` when it is nonempty.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::string& out_dir = "") {
  validate(cfg);
  const BuiltNetwork net = build_network(cfg.network);
  const std::size_t n = net.graph.node_count();
  detail::require(is_connected(net.graph), "experiment network is disconnected");
  const bool vc = cfg.mode == SamplingMode::kVc;
  const bool score_etp = vc && net.layout && net.layout->dims() == 2 && cfg.k == 2;
  ScanLineConfig scan;
  scan.bin_width = cfg.bin_width > 0 ? cfg.bin_width : net.pitch;

  std::optional<HopDistanceMatrix> hdm;
  if (!vc) hdm = all_pairs_hops(net.graph);

  const std::size_t nf = cfg.fractions.size();
  std::vector<detail::TaskOutput> outputs(cfg.repeats);

  auto run_repeat = [&](std::size_t r) {
    detail::TaskOutput& out = outputs[r];
    const std::uint64_t run_seed = derive_seed(cfg.seed, r);
    auto record = [&](const std::string& proc, double f, const char* metric, double v) {
      out.rows.push_back({net.name, proc, vc ? cfg.anchors.m : n, f, run_seed, metric, v});
    };
    if (!vc) {
      for (std::size_t fi = 0; fi < nf; ++fi) {
        const double f = cfg.fractions[fi];
        ++out.runs;
        try {
          ObservedMatrix o = random_entry_observations(*hdm, 1.0 - f, derive_seed(run_seed, fi + 1));
          CompletionResult c = complete_nuclear_norm(o, cfg.completion);
          record("completion", f, "E_m", hdm_mean_error(c.L, *hdm));
          record("completion", f, "E_a", hdm_absolute_error(c.L, *hdm));
          record("completion", f, "iterations", static_cast<double>(c.iterations));
          record("completion", f, "converged", c.converged ? 1.0 : 0.0);
        } catch (const std::exception& e) {
          out.failures.push_back({f, r, "completion", e.what()});
        }
      }
      return;
    }

    AnchorSelection sel = cfg.anchors;
    sel.seed = derive_seed(run_seed, 0);
    std::vector<NodeId> anchors;
    VcMatrix p;
    try {
      anchors = select_anchors(net.graph, sel);
      p = anchor_hops(net.graph, anchors);
    } catch (const std::exception& e) {
      for (double f : cfg.fractions) {
        for (auto proc : cfg.procedures) {
          ++out.runs;
          out.failures.push_back({f, r, to_string(proc), e.what()});
        }
      }
      return;
    }
    const ObservedMatrix full = vc_observations(p, 0.0, 0);
    std::vector<std::optional<TopologyMap>> baseline;
    for (auto proc : cfg.procedures) {
      try {
        baseline.push_back(build_tpm(proc, full, cfg.k, cfg.completion));
        if (r == 0) out.maps.emplace_back(std::string("tpm_") + to_string(proc) + "_baseline.csv", *baseline.back());
      } catch (const std::exception&) {
        baseline.push_back(std::nullopt);
      }
    }
    for (std::size_t fi = 0; fi < nf; ++fi) {
      const double f = cfg.fractions[fi];
      std::optional<ObservedMatrix> obs;
      std::string sample_error;
      try {
        obs = vc_observations(p, f, derive_seed(run_seed, fi + 1));
      } catch (const std::exception& e) {
        sample_error = e.what();
      }
      for (std::size_t pi = 0; pi < cfg.procedures.size(); ++pi) {
        const auto proc = cfg.procedures[pi];
        const std::string name = to_string(proc);
        ++out.runs;
        if (!obs) {
          out.failures.push_back({f, r, name, sample_error});
          continue;
        }
        if (!baseline[pi]) {
          out.failures.push_back({f, r, name, "baseline map failed"});
          continue;
        }
        try {
          CompletionResult diag;
          TopologyMap map = build_tpm(proc, *obs, cfg.k, cfg.completion, &diag);
          record(name, f, "E", mean_distance_error(map, *baseline[pi], anchors));
          if (score_etp) {
            TopologyMap layout_map{net.layout->coords};
            Alignment al = align_maps(map, layout_map);
            record(name, f, "E_TP", topology_preservation_error(*net.layout, al.aligned, scan));
          }
          record(name, f, "iterations", static_cast<double>(diag.iterations));
          if (r == 0) {
            out.maps.emplace_back("tpm_" + name + "_f" + io::fmt(f) + ".csv", std::move(map));
          }
        } catch (const std::exception& e) {
          out.failures.push_back({f, r, name, e.what()});
        }
      }
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, cfg.repeats);
  if (threads <= 1) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) run_repeat(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t r; (r = next.fetch_add(1)) < cfg.repeats;) run_repeat(r);
      });
    }
  }

  // Reorder into (fraction, repeat) order.
  ExperimentResult result;
  result.network = net.name;
  for (std::size_t fi = 0; fi < nf; ++fi) {
    for (std::size_t r = 0; r < cfg.repeats; ++r) {
      for (const auto& row : outputs[r].rows) {
        if (row.fraction == cfg.fractions[fi]) result.rows.push_back(row);
      }
      for (const auto& fl : outputs[r].failures) {
        if (fl.fraction == cfg.fractions[fi]) result.failures.push_back(fl);
      }
    }
  }
  for (const auto& o : outputs) result.total_runs += o.runs;
  result.cells = detail::summarize(result.rows);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    {
      auto f = io::open_out((dir / "results.csv").string());
      f << io::kMetricHeader << '\n';
      for (const auto& row : result.rows) io::write_metric_row(f, row);
    }
    {
      auto f = io::open_out((dir / "summary.csv").string());
      f << "network,procedure,M,f,metric,mean,std,runs\n";
      for (const auto& c : result.cells) {
        f << net.name << ',' << c.procedure << ',' << (vc ? cfg.anchors.m : n) << ','
          << io::fmt(c.fraction) << ',' << c.metric << ',' << io::fmt(c.mean) << ','
          << io::fmt(c.stddev) << ',' << c.runs << '\n';
      }
    }
    {
      auto f = io::open_out((dir / "failures.csv").string());
      f << "f,repeat,procedure,message\n";
      for (const auto& fl : result.failures) {
        std::string msg = fl.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        f << io::fmt(fl.fraction) << ',' << fl.repeat << ',' << fl.procedure << ',' << msg << '\n';
      }
    }
    if (net.layout) {
      auto f = io::open_out((dir / "layout.csv").string());
      io::write_points(f, net.layout->coords);
    }
    if (cfg.write_maps) {
      for (const auto& [name, map] : outputs[0].maps) {
        auto f = io::open_out((dir / name).string());
        io::write_points(f, map.coords);
      }
    }
    {
      auto f = io::open_out((dir / "experiment.json").string());
      nlohmann::json meta = to_json(cfg);
      meta["nodes"] = n;
      meta["edges"] = net.graph.edge_count();
      meta["total_runs"] = result.total_runs;
      meta["failed_runs"] = result.failures.size();
      f << meta.dump(2) << '\n';
    }
  }
  return result;
}

}  // namespace hoptopo
