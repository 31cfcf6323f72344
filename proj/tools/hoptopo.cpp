// hoptopo: generate networks, sample hop distances, complete, map, score.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 convergence or experiment failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hoptopo/experiment.hpp"
#include "hoptopo/io.hpp"

namespace fs = std::filesystem;
using namespace hoptopo;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitFailure = 3;

// Writes to `path`, or stdout when it is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
  } else {
    auto out = io::open_out(path);
    write(out);
  }
}

Graph read_graph(const std::string& path) { return load_snap_edge_list(path).graph; }

TopologyMap read_map(const std::string& path) {
  auto in = io::open_in(path);
  return {io::read_points(in)};
}

Eigen::MatrixXd read_dense(const std::string& path) {
  auto in = io::open_in(path);
  return io::read_matrix(in);
}

std::vector<NodeId> parse_id_list(const std::string& s) {
  std::vector<NodeId> out;
  for (const auto& cell : io::split_csv(s)) {
    double v = io::parse_double(cell, 1);
    detail::require(v >= 0 && v == static_cast<double>(static_cast<NodeId>(v)),
                    "bad node id '" + cell + "'");
    out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string net = "circular";
  std::uint64_t seed = 1;
  std::size_t n = 500, m = 3;
  double p_triad = 0.5;
  double pitch = 1.0, jitter = 0.3, radius_factor = 1.8;
  std::string edge_list;
  std::size_t subgraph = 0;
  NodeId root = 0;
  std::string config;
  std::string out = ".";
};

int cmd_generate(CLI::App& sub, const GenerateArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) merge_json(cfg, io::read_json(a.config));
  NetworkSpec& spec = cfg.network;
  auto given = [&](const char* flag) { return sub.count(flag) > 0 || a.config.empty(); };
  if (given("--net")) spec.generator = a.net;
  if (given("--seed")) spec.gen.seed = a.seed;
  if (given("--n")) spec.n = a.n;
  if (given("--m")) spec.m = a.m;
  if (given("--p-triad")) spec.p_triad = a.p_triad;
  if (given("--pitch")) spec.gen.pitch = a.pitch;
  if (given("--jitter")) spec.gen.jitter = a.jitter;
  if (given("--radius-factor")) spec.gen.radius_factor = a.radius_factor;
  if (given("--edge-list")) spec.edge_list = a.edge_list;
  if (given("--subgraph")) spec.subgraph = a.subgraph;
  if (given("--root")) spec.root = a.root;

  BuiltNetwork net = build_network(spec);
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  {
    auto f = io::open_out((dir / "edges.txt").string());
    io::write_edge_list(f, net.graph);
  }
  if (net.layout) {
    auto f = io::open_out((dir / "layout.csv").string());
    io::write_points(f, net.layout->coords);
  }
  if (!net.original_ids.empty()) {
    auto f = io::open_out((dir / "nodes.csv").string());
    io::write_node_map(f, net.original_ids);
  }
  json meta = to_json(cfg)["network"];
  meta["nodes"] = net.graph.node_count();
  meta["edges"] = net.graph.edge_count();
  meta["connected"] = is_connected(net.graph);
  if (net.layout) {
    meta["dims"] = net.layout->dims();
    meta["comm_radius"] = spec.gen.comm_radius();
  }
  auto f = io::open_out((dir / "meta.json").string());
  f << meta.dump(2) << '\n';
  std::cerr << net.name << ": " << net.graph.node_count() << " nodes, "
            << net.graph.edge_count() << " edges -> " << a.out << '\n';
  return 0;
}

// --- spectrum -----------------------------------------------------------------

struct SpectrumArgs {
  std::string edges, matrix;
  std::string kind = "hdm";
  std::size_t anchors = 0;
  std::string strategy = "random";
  bool centered = false;
  std::size_t top = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_spectrum(const SpectrumArgs& a) {
  detail::require(a.edges.empty() != a.matrix.empty(), "give exactly one of --edges or --matrix");
  Eigen::MatrixXd m;
  if (!a.matrix.empty()) {
    m = read_dense(a.matrix);
  } else {
    Graph g = read_graph(a.edges);
    if (a.kind == "adjacency") {
      m = adjacency_matrix(g);
    } else if (a.kind == "hdm") {
      m = all_pairs_hops(g).to_dense();
      if (a.anchors > 0) {
        // Columns restricted to a selected anchor subset.
        AnchorSelection sel{parse_strategy(a.strategy), a.anchors, a.seed};
        m = anchor_hops(g, select_anchors(g, sel)).to_dense();
      }
    } else {
      detail::fail("unknown --kind '" + a.kind + "' (hdm | adjacency)");
    }
  }
  Eigen::VectorXd s = normalized_spectrum(m, a.centered);
  const auto count = a.top ? std::min<Eigen::Index>(a.top, s.size()) : s.size();
  emit(a.out, [&](std::ostream& os) {
    os << "index,value\n";
    for (Eigen::Index i = 0; i < count; ++i) os << i + 1 << ',' << io::fmt(s(i)) << '\n';
  });
  return 0;
}

// --- sample -------------------------------------------------------------------

struct SampleArgs {
  std::string edges;
  std::string mode = "vc";
  std::size_t anchors = 20;
  std::string strategy = "random";
  double remove = 0.0;
  double observe = 0.2;
  std::uint64_t seed = 1;
  std::string out = "observations";
};

int cmd_sample(const SampleArgs& a) {
  Graph g = read_graph(a.edges);
  ObservedMatrix o;
  if (parse_sampling_mode(a.mode) == SamplingMode::kVc) {
    AnchorSelection sel{parse_strategy(a.strategy), a.anchors, derive_seed(a.seed, 0)};
    VcMatrix p = anchor_hops(g, select_anchors(g, sel));
    o = vc_observations(p, a.remove, derive_seed(a.seed, 1));
  } else {
    o = random_entry_observations(all_pairs_hops(g), a.observe, derive_seed(a.seed, 1));
  }
  io::save_observations(a.out, o);
  std::cerr << "observed " << o.observed() << " of " << o.rows() * o.cols() << " cells -> "
            << a.out << ".csv\n";
  return 0;
}

// --- complete -----------------------------------------------------------------

struct CompletionArgs {
  double tolerance = 1e-6;
  std::size_t max_iters = 500;
  double growth = 1.05;
  std::string config;
};

void add_completion_flags(CLI::App* sub, CompletionArgs& c) {
  sub->add_option("--tolerance", c.tolerance, "Relative residual on the mask")->capture_default_str();
  sub->add_option("--max-iters", c.max_iters, "Iteration cap")->capture_default_str();
  sub->add_option("--growth", c.growth, "Penalty growth per iteration")->capture_default_str();
  sub->add_option("--config", c.config, "JSON config; its 'completion' block sets defaults");
}

CompletionConfig completion_config(const CLI::App& sub, const CompletionArgs& c) {
  ExperimentConfig base;
  if (!c.config.empty()) merge_json(base, io::read_json(c.config));
  CompletionConfig cfg = base.completion;
  auto given = [&](const char* flag) { return sub.count(flag) > 0 || c.config.empty(); };
  if (given("--tolerance")) cfg.tolerance = c.tolerance;
  if (given("--max-iters")) cfg.max_iters = c.max_iters;
  if (given("--growth")) cfg.penalty_growth = c.growth;
  return cfg;
}

struct CompleteArgs {
  std::string input;
  std::string out = "completed";
  std::string trace;
  std::uint64_t seed = 0;  // accepted for uniformity; completion is deterministic
};

int cmd_complete(const CLI::App& sub, const CompleteArgs& a, const CompletionArgs& c) {
  ObservedMatrix o = io::load_observations(a.input);
  MaskReport rep = validate_mask(o);
  detail::require(rep.ok(), "observation mask unusable: " + rep.summary());
  CompletionResult r = complete_nuclear_norm(o, completion_config(sub, c));
  {
    auto f = io::open_out(a.out + ".csv");
    io::write_matrix(f, r.L);
  }
  {
    json meta{{"rows", o.rows()},
              {"cols", o.cols()},
              {"mode", io::to_string(o.mode)},
              {"iterations", r.iterations},
              {"final_residual", r.final_residual},
              {"converged", r.converged},
              {"rank", numerical_rank(r.L)}};
    auto f = io::open_out(a.out + ".json");
    f << meta.dump(2) << '\n';
  }
  if (!a.trace.empty()) {
    auto f = io::open_out(a.trace);
    f << "iteration,residual,nuclear_norm\n";
    for (const auto& t : r.trace) {
      f << t.iteration << ',' << io::fmt(t.residual) << ',' << io::fmt(t.nuclear_norm) << '\n';
    }
  }
  if (!r.converged) {
    std::cerr << "completion did not converge: residual " << r.final_residual << " after "
              << r.iterations << " iterations\n";
    return kExitFailure;
  }
  return 0;
}

// --- tpm ----------------------------------------------------------------------

struct TpmArgs {
  std::string input, matrix;
  std::string procedure = "p-completion";
  std::size_t k = 2;
  std::string align;
  std::string out;
};

int cmd_tpm(const CLI::App& sub, const TpmArgs& a, const CompletionArgs& c) {
  detail::require(a.input.empty() != a.matrix.empty(), "give exactly one of --input or --matrix");
  TopologyMap map;
  if (!a.matrix.empty()) {
    map = tpm_full_vc(read_dense(a.matrix), a.k);
  } else {
    ObservedMatrix o = io::load_observations(a.input);
    map = build_tpm(parse_procedure(a.procedure), o, a.k, completion_config(sub, c));
  }
  if (!a.align.empty()) map = align_maps(map, read_map(a.align)).aligned;
  emit(a.out, [&](std::ostream& os) { io::write_points(os, map.coords); });
  return 0;
}

// --- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string metric;
  std::string map, baseline, anchors, anchors_from;
  std::string layout;
  double bin_width = 1.0;
  bool no_align = false;
  std::string estimate, edges;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  double value = 0;
  if (a.metric == "E") {
    detail::require(!a.map.empty() && !a.baseline.empty(), "E needs --map and --baseline");
    std::vector<NodeId> anchors;
    if (!a.anchors.empty()) anchors = parse_id_list(a.anchors);
    else if (!a.anchors_from.empty()) anchors = io::read_json(a.anchors_from).value("anchors", anchors);
    detail::require(!anchors.empty(), "E needs --anchors or --anchors-from");
    value = mean_distance_error(read_map(a.map), read_map(a.baseline), anchors);
  } else if (a.metric == "E_TP") {
    detail::require(!a.map.empty() && !a.layout.empty(), "E_TP needs --map and --layout");
    PointCloud layout{read_map(a.layout).coords};
    TopologyMap map = read_map(a.map);
    if (!a.no_align) map = align_maps(map, TopologyMap{layout.coords}).aligned;
    value = topology_preservation_error(layout, map, {a.bin_width, true, true});
  } else if (a.metric == "E_m" || a.metric == "E_a") {
    detail::require(!a.estimate.empty() && !a.edges.empty(), a.metric + " needs --estimate and --edges");
    HopDistanceMatrix h = all_pairs_hops(read_graph(a.edges));
    Eigen::MatrixXd est = read_dense(a.estimate);
    value = a.metric == "E_m" ? hdm_mean_error(est, h) : hdm_absolute_error(est, h);
  } else {
    detail::fail("unknown --metric '" + a.metric + "' (E | E_TP | E_m | E_a)");
  }
  emit(a.out, [&](std::ostream& os) { os << "metric,value\n" << a.metric << ',' << io::fmt(value) << '\n'; });
  return 0;
}

// --- experiment ---------------------------------------------------------------

struct ExperimentArgs {
  std::string config;
  std::uint64_t seed = 1;
  std::size_t repeats = 100;
  std::size_t threads = 0;
  std::string out = "results";
};

int cmd_experiment(const CLI::App& sub, const ExperimentArgs& a) {
  ExperimentConfig cfg;
  if (!a.config.empty()) merge_json(cfg, io::read_json(a.config));
  if (sub.count("--seed")) cfg.seed = a.seed;
  if (sub.count("--repeats")) cfg.repeats = a.repeats;
  if (sub.count("--threads")) cfg.threads = a.threads;
  ExperimentResult r = run_experiment(cfg, a.out);
  for (const auto& c : r.cells) {
    if (c.metric == "iterations") continue;
    std::cout << c.procedure << " f=" << io::fmt(c.fraction) << ' ' << c.metric << " mean "
              << io::fmt(c.mean) << " std " << io::fmt(c.stddev) << " (" << c.runs << " runs)\n";
  }
  if (!r.failures.empty()) {
    std::cerr << r.failures.size() << " of " << r.total_runs << " runs failed; see "
              << (fs::path(a.out) / "failures.csv").string() << '\n';
  }
  return r.failure_rate() > 0.10 ? kExitFailure : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network topology recovery from sparse hop-distance measurements"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hoptopo 0.1.0");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a network: edges.txt, layout.csv, meta.json");
  g->add_option("--net", gen.net, "concave | circular | cube | t-cylinder | holme-kim | snap")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--n", gen.n, "Holme-Kim node count")->capture_default_str();
  g->add_option("--m", gen.m, "Holme-Kim edges per new node")->capture_default_str();
  g->add_option("--p-triad", gen.p_triad, "Holme-Kim triad probability")->capture_default_str();
  g->add_option("--pitch", gen.pitch, "Grid pitch")->capture_default_str();
  g->add_option("--jitter", gen.jitter, "Jitter as a fraction of pitch")->capture_default_str();
  g->add_option("--radius-factor", gen.radius_factor, "Radio range in pitches")->capture_default_str();
  g->add_option("--edge-list", gen.edge_list, "SNAP edge list (snap)");
  g->add_option("--subgraph", gen.subgraph, "BFS subgraph size (snap), 0 = all");
  g->add_option("--root", gen.root, "BFS root (snap, dense id)");
  g->add_option("--config", gen.config, "JSON config; its 'network' block sets defaults");
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();

  SpectrumArgs spec;
  auto* s = app.add_subcommand("spectrum", "Normalized singular values of a matrix");
  s->add_option("--edges", spec.edges, "SNAP edge list");
  s->add_option("--matrix", spec.matrix, "Dense matrix CSV");
  s->add_option("--kind", spec.kind, "hdm | adjacency (with --edges)")->capture_default_str();
  s->add_option("--anchors", spec.anchors, "Restrict the HDM to M anchor columns");
  s->add_option("--strategy", spec.strategy, "random | degree | closeness | betweenness")->capture_default_str();
  s->add_flag("--centered", spec.centered, "Double-center as squared distances first");
  s->add_option("--top", spec.top, "Only the first k values");
  s->add_option("--seed", spec.seed, "Anchor seed")->capture_default_str();
  s->add_option("--out", spec.out, "Output CSV (default stdout)");

  SampleArgs samp;
  auto* sa = app.add_subcommand("sample", "Sample hop distances into <out>.csv + <out>.json");
  sa->add_option("--edges", samp.edges, "SNAP edge list")->required();
  sa->add_option("--mode", samp.mode, "vc | random-entry")->capture_default_str();
  sa->add_option("--anchors", samp.anchors, "Anchor count (vc)")->capture_default_str();
  sa->add_option("--strategy", samp.strategy, "Anchor strategy (vc)")->capture_default_str();
  sa->add_option("--delete", samp.remove, "Fraction of P entries deleted (vc)")->capture_default_str();
  sa->add_option("--observe", samp.observe, "Fraction of H observed (random-entry)")->capture_default_str();
  sa->add_option("--seed", samp.seed, "Sampling seed")->capture_default_str();
  sa->add_option("--out", samp.out, "Output prefix")->capture_default_str();

  CompleteArgs comp;
  CompletionArgs comp_cfg;
  auto* c = app.add_subcommand("complete", "Nuclear-norm completion of an observation file");
  c->add_option("--input", comp.input, "Observation prefix")->required();
  c->add_option("--out", comp.out, "Output prefix")->capture_default_str();
  c->add_option("--trace", comp.trace, "Per-iteration trace CSV");
  c->add_option("--seed", comp.seed, "Unused; completion is deterministic");
  add_completion_flags(c, comp_cfg);

  TpmArgs tpm;
  CompletionArgs tpm_cfg;
  auto* t = app.add_subcommand("tpm", "Topology-preserving map from observations or a full P");
  t->add_option("--input", tpm.input, "Observation prefix");
  t->add_option("--matrix", tpm.matrix, "Complete P as dense CSV");
  t->add_option("--procedure", tpm.procedure, "grammian | p-completion")->capture_default_str();
  t->add_option("--k", tpm.k, "Map dimension")->capture_default_str();
  t->add_option("--align", tpm.align, "Align the map onto this layout CSV");
  t->add_option("--out", tpm.out, "Output CSV (default stdout)");
  add_completion_flags(t, tpm_cfg);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a map or a completed hop-distance matrix");
  e->add_option("--metric", ev.metric, "E | E_TP | E_m | E_a")->required();
  e->add_option("--map", ev.map, "Map CSV");
  e->add_option("--baseline", ev.baseline, "Baseline map CSV (E)");
  e->add_option("--anchors", ev.anchors, "Comma-separated anchor ids (E)");
  e->add_option("--anchors-from", ev.anchors_from, "Observation JSON holding 'anchors' (E)");
  e->add_option("--layout", ev.layout, "Layout CSV (E_TP)");
  e->add_option("--bin-width", ev.bin_width, "Scan-line bin width (E_TP)")->capture_default_str();
  e->add_flag("--no-align", ev.no_align, "Skip Procrustes alignment (E_TP)");
  e->add_option("--estimate", ev.estimate, "Completed matrix CSV (E_m, E_a)");
  e->add_option("--edges", ev.edges, "SNAP edge list (E_m, E_a)");
  e->add_option("--out", ev.out, "Output CSV (default stdout)");

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "Monte-Carlo sweep over fractions and repeats");
  x->add_option("--config", ex.config, "Experiment JSON");
  x->add_option("--seed", ex.seed, "Master seed");
  x->add_option("--repeats", ex.repeats, "Repeats per fraction");
  x->add_option("--threads", ex.threads, "Worker threads, 0 = all cores");
  x->add_option("--out", ex.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*g) return cmd_generate(*g, gen);
    if (*s) return cmd_spectrum(spec);
    if (*sa) return cmd_sample(samp);
    if (*c) return cmd_complete(*c, comp, comp_cfg);
    if (*t) return cmd_tpm(*t, tpm, tpm_cfg);
    if (*e) return cmd_eval(ev);
    if (*x) return cmd_experiment(*x, ex);
  } catch (const ConvergenceError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitFailure;
  } catch (const DataError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
