#include "gsp/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "gsp/errors.hpp"
#include "gsp/io.hpp"
#include "gsp/mindeg.hpp"
#include "gsp/polytope.hpp"
#include "gsp/search.hpp"
#include "gsp/simbench.hpp"

#include <json.hpp>

namespace gsp {

namespace {

namespace fs = std::filesystem;

// Flag combinations CLI11 cannot express; reported with exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<int> parse_depth(const std::string& text) {
  if (text == "inf" || text == "unbounded") return std::nullopt;
  try {
    std::size_t used = 0;
    const int d = std::stoi(text, &used);
    if (used == text.size() && d >= 1) return d;
  } catch (const std::exception&) {
  }
  throw UsageError("--depth must be a positive integer or 'inf'");
}

std::string edge_list(const Dag& g) {
  std::string out;
  for (const Arrow& a : g.arrows()) {
    if (!out.empty()) out += ", ";
    out += std::to_string(a.from + 1) + " -> " + std::to_string(a.to + 1);
  }
  return out.empty() ? "(no arrows)" : out;
}

std::string statement_text(const CiStatement& c) {
  std::string out = std::to_string(c.i + 1) + " _||_ " + std::to_string(c.j + 1) + " |";
  c.s.for_each([&](Node v) { out += " " + std::to_string(v + 1); });
  return out;
}

// ---- learn ----------------------------------------------------------------

struct LearnOptions {
  std::string algo;
  std::string ci;
  std::optional<double> lambda;
  std::optional<double> alpha;
  std::string depth = "4";
  int runs = 1;
  std::string start = "random";
  std::uint64_t seed = 0;
  std::optional<int> nodes;
  std::string out;
};

struct CiSource {
  std::string kind;
  std::unique_ptr<CiOracle> oracle;
  std::optional<GaussianSuffStats> stats;
};

CiSource open_ci(const LearnOptions& o) {
  const auto colon = o.ci.find(':');
  if (colon == std::string::npos) throw UsageError("--ci must look like KIND:PATH");
  CiSource src;
  src.kind = o.ci.substr(0, colon);
  const fs::path path = o.ci.substr(colon + 1);
  if (src.kind == "oracle") {
    src.oracle = std::make_unique<DsepOracle>(io::read_dag(path, o.nodes));
  } else if (src.kind == "relations") {
    src.oracle = std::make_unique<ExplicitCiOracle>(io::read_ci_set(path, o.nodes));
  } else if (src.kind == "gauss" || src.kind == "samples") {
    const Eigen::MatrixXd m = io::read_csv_matrix(path);
    src.stats = src.kind == "gauss" ? GaussianSuffStats::FromCovariance(m) : GaussianSuffStats::FromSamples(m);
    if (o.nodes && *o.nodes != src.stats->num_nodes()) throw InputError("--nodes disagrees with the data");
    if (o.lambda) {
      src.oracle = std::make_unique<GaussianOracle>(GaussianOracle::Threshold(*src.stats, *o.lambda));
    } else if (o.alpha) {
      if (src.kind == "gauss") throw UsageError("--alpha needs samples; use --lambda with a covariance");
      src.oracle = std::make_unique<GaussianOracle>(GaussianOracle::FisherZ(*src.stats, *o.alpha));
    } else if (o.algo != "bic-sp") {
      throw UsageError("Gaussian CI sources need --lambda or --alpha");
    }
  } else {
    throw UsageError("unknown CI source '" + src.kind + "'");
  }
  if (src.kind != "gauss" && src.kind != "samples" && (o.lambda || o.alpha)) {
    throw UsageError("--lambda/--alpha only apply to gauss: and samples: sources");
  }
  return src;
}

int learn(const LearnOptions& o, std::ostream& out) {
  CiSource src = open_ci(o);
  const int p = src.oracle ? src.oracle->num_nodes() : src.stats->num_nodes();
  SearchConfig cfg;
  cfg.depth = parse_depth(o.depth);
  cfg.runs = o.runs;
  cfg.seed = o.seed;
  if (o.start == "random") {
    cfg.start = StartKind::kRandom;
  } else if (o.start == "order") {
    cfg.start = StartKind::kOrder;
  } else if (o.start == "mindeg") {
    cfg.start = StartKind::kMinDegree;
  } else {
    cfg.start = StartKind::kExplicit;
    cfg.start_perm = io::parse_permutation(o.start, p);
  }
  if (o.lambda) cfg.mindeg_tau = *o.lambda;

  std::optional<Dag> dag;
  Cpdag cpdag;
  std::string trace;
  if (o.algo == "triangle-sp" || o.algo == "highdim-sp" || o.algo == "bic-sp") {
    SearchResult r;
    if (o.algo == "triangle-sp") {
      r = triangle_sp(*src.oracle, cfg);
    } else if (o.algo == "highdim-sp") {
      r = highdim_greedy_sp(*src.oracle, cfg);
    } else {
      if (src.kind != "samples") throw UsageError("bic-sp needs a samples: source");
      r = triangle_sp_bic(*src.stats, cfg);
    }
    dag = r.dag();
    trace = r.trace.to_jsonl();
  } else if (o.algo == "edge-sp") {
    std::mt19937_64 rng(o.seed);
    Permutation start = cfg.start == StartKind::kExplicit    ? *cfg.start_perm
                        : cfg.start == StartKind::kOrder     ? Permutation::Identity(p)
                        : cfg.start == StartKind::kMinDegree ? neighbor_min_degree(*src.oracle, rng).perm
                                                             : Permutation::Random(p, rng);
    EdgeSpConfig ecfg;
    ecfg.depth = cfg.depth;
    const EdgeSpResult r = edge_sp(*src.oracle, start, ecfg);
    dag = r.dag;
    nlohmann::json j = {{"summary", true},
                        {"start", io::format_permutation(start)},
                        {"improvements", r.walk.size() - 1},
                        {"visited", r.visited}};
    trace = j.dump() + "\n";
  } else if (o.algo == "sp") {
    const BruteForceResult bf = sp_brute_force(*src.oracle);
    dag = bf.sparsest.front();
    nlohmann::json j = {{"summary", true},
                        {"min_arrows", bf.min_arrows},
                        {"sparsest_dags", bf.sparsest.size()},
                        {"sparsest_classes", bf.classes.size()}};
    trace = j.dump() + "\n";
  } else if (o.algo == "pc") {
    cpdag = pc_baseline(*src.oracle);
    Dag ext;
    if (consistent_extension(cpdag, &ext)) dag = ext;
    trace = nlohmann::json({{"summary", true}, {"extendable", dag.has_value()}}).dump() + "\n";
  } else if (o.algo == "mindeg") {
    std::mt19937_64 rng(o.seed);
    const MinDegreeResult r = neighbor_min_degree(*src.oracle, rng);
    dag = r.imap.dag;
    trace = nlohmann::json({{"summary", true}, {"perm", io::format_permutation(r.perm)}}).dump() + "\n";
  } else {
    throw UsageError("unknown algorithm '" + o.algo + "'");
  }
  if (o.algo != "pc") cpdag = essential_graph(*dag);

  fs::create_directories(o.out);
  io::write_text(fs::path(o.out) / "cpdag.txt", io::format_cpdag(cpdag));
  io::write_text(fs::path(o.out) / "dag.txt", dag ? io::format_dag(*dag) : "# nodes: " + std::to_string(p) + "\n# no consistent extension\n");
  io::write_text(fs::path(o.out) / "trace.jsonl", trace);
  out << o.algo << ": " << (dag ? std::to_string(dag->arrow_count()) + " arrows" : "no consistent extension")
      << ", wrote " << o.out << "\n";
  return kExitOk;
}

// ---- simulate -----------------------------------------------------------

int simulate(int nodes, double density, std::optional<long> samples, std::uint64_t seed, const std::string& dir,
             std::ostream& out) {
  std::mt19937_64 rng(seed);
  const SemModel m = random_gaussian_dag(nodes, density, rng);
  fs::create_directories(dir);
  io::write_text(fs::path(dir) / "dag.txt", io::format_dag(m.dag));
  io::write_text(fs::path(dir) / "weights.csv", io::format_csv_matrix(m.weights));
  io::write_text(fs::path(dir) / "sigma.csv", io::format_csv_matrix(sem_covariance(m)));
  if (samples) {
    std::vector<std::string> header;
    for (int v = 1; v <= nodes; ++v) header.push_back("X" + std::to_string(v));
    io::write_text(fs::path(dir) / "samples.csv", io::format_csv_matrix(sem_sample(m, *samples, rng), header));
  }
  out << "simulated " << m.dag.arrow_count() << " arrows on " << nodes << " nodes, wrote " << dir << "\n";
  return kExitOk;
}

// ---- polytope / check ---------------------------------------------------

CiSet load_relations(const std::string& path, int nodes) {
  const CiSet c = io::read_ci_set(path, nodes);
  return c;
}

int polytope(const std::string& kind, const std::string& relations, int nodes, bool force, const std::string& dir,
             std::ostream& out) {
  const int assoc_guard = force ? 10 : 7;
  const int even_guard = force ? 10 : 8;
  std::optional<QuotientPolytopeGraph> g;
  if (kind == "even") {
    g.emplace(even_permutohedron_graph(nodes, even_guard));
  } else {
    if (relations.empty()) throw UsageError("--relations is required for associahedra");
    const ExplicitCiOracle oracle(load_relations(relations, nodes));
    g.emplace(kind == "assoc" ? dag_associahedron_graph(oracle, assoc_guard)
                              : even_associahedron_graph(oracle, assoc_guard));
  }
  fs::create_directories(dir);
  io::write_text(fs::path(dir) / "graph.json", g->to_json());
  io::write_text(fs::path(dir) / "graph.dot", g->to_dot());
  out << kind << ": " << g->num_classes() << " vertices, " << g->edge_count() << " edges\n";
  if (g->ambiguous_classes()) out << "warning: some classes hold several distinct minimal I-MAPs (relations are not a graphoid)\n";
  return kExitOk;
}

int check(const std::string& which, const std::string& relations, int nodes, bool force, std::ostream& out) {
  const CiSet c = load_relations(relations, nodes);
  out << "assumption: " << which << "\n";
  if (which == "graphoid") {
    const GraphoidReport r = check_graphoid(c, nodes);
    auto show = [&](const char* name, bool ok, const std::optional<GraphoidReport::Counterexample>& w) {
      out << name << ": " << (ok ? "holds" : "fails") << "\n";
      if (w) {
        out << "  premises:";
        for (const CiStatement& s : w->premises) out << " [" << statement_text(s) << "]";
        out << "\n  missing: " << statement_text(w->missing) << "\n";
      }
    };
    show("SG1", r.sg1, r.sg1_witness);
    show("SG2", r.sg2, r.sg2_witness);
    show("INT", r.intersection, r.intersection_witness);
    out << "holds: " << (r.holds() ? "yes" : "no") << "\n";
    return r.holds() ? kExitOk : kExitDoesNotHold;
  }
  const Assumption a = which == "tsp" ? Assumption::kTsp : which == "esp" ? Assumption::kEsp : Assumption::kSmr;
  const ExplicitCiOracle oracle(c);
  const AssumptionReport r = check_assumption(oracle, a, force ? 8 : 6);
  out << "holds: " << (r.holds ? "yes" : "no") << "\n";
  out << "sparsest arrows: " << r.sparsest_arrows << "\n";
  out << "detail: " << r.detail << "\n";
  if (r.witness_start) {
    out << "witness start: " << io::format_permutation(*r.witness_start) << "\n";
    out << "witness output: " << edge_list(*r.witness_output) << "\n";
    out << "failing starts:";
    for (const Permutation& s : r.failing_starts) out << " " << io::format_permutation(s);
    out << "\n";
  }
  return r.holds ? kExitOk : kExitDoesNotHold;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy sparsest-permutation causal discovery"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Draw a random Gaussian DAG model");
  int sim_nodes = 0;
  double sim_density = 0.0;
  std::optional<long> sim_samples;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim->add_option("--nodes", sim_nodes, "Number of nodes")->required()->check(CLI::Range(2, 256));
  sim->add_option("--density", sim_density, "Expected neighborhood size")->required();
  sim->add_option("--samples", sim_samples, "Number of samples to draw")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Random seed")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();

  auto* lrn = app.add_subcommand("learn", "Learn a CPDAG");
  LearnOptions lo;
  lrn->add_option("--algo", lo.algo, "Algorithm")
      ->required()
      ->check(CLI::IsMember({"triangle-sp", "edge-sp", "highdim-sp", "sp", "pc", "bic-sp", "mindeg"}));
  lrn->add_option("--ci", lo.ci, "CI source: oracle:DAG | relations:CI | gauss:SIGMA.csv | samples:DATA.csv")
      ->required();
  auto* lam = lrn->add_option("--lambda", lo.lambda, "Partial-correlation threshold")->check(CLI::PositiveNumber);
  auto* alp = lrn->add_option("--alpha", lo.alpha, "Fisher z level")->check(CLI::Range(0.0, 1.0));
  lam->excludes(alp);
  lrn->add_option("--depth", lo.depth, "Search depth or 'inf'")->capture_default_str();
  lrn->add_option("--runs", lo.runs, "Number of runs")->check(CLI::PositiveNumber)->capture_default_str();
  lrn->add_option("--start", lo.start, "order | random | mindeg | PERM")->capture_default_str();
  lrn->add_option("--seed", lo.seed, "Random seed")->capture_default_str();
  lrn->add_option("--nodes", lo.nodes, "Node count for graph and relation files");
  lrn->add_option("--out", lo.out, "Output directory")->required();

  auto* bench = app.add_subcommand("bench", "Run a benchmark grid");
  std::string grid_path;
  std::string bench_out;
  bench->add_option("--grid", grid_path, "Grid JSON")->required();
  bench->add_option("--out", bench_out, "Output directory")->required();

  auto* poly = app.add_subcommand("polytope", "Export a quotient polytope graph");
  std::string poly_kind;
  std::string poly_rel;
  int poly_nodes = 0;
  std::string poly_out;
  bool poly_force = false;
  poly->add_option("--kind", poly_kind, "assoc | even | even-assoc")
      ->required()
      ->check(CLI::IsMember({"assoc", "even", "even-assoc"}));
  poly->add_option("--relations", poly_rel, "CI relations file");
  poly->add_option("--nodes", poly_nodes, "Number of nodes")->required()->check(CLI::Range(1, 256));
  poly->add_option("--out", poly_out, "Output directory")->required();
  poly->add_flag("--force", poly_force, "Raise the enumeration guard");

  auto* chk = app.add_subcommand("check", "Check an identifiability assumption");
  std::string which;
  std::string chk_rel;
  int chk_nodes = 0;
  bool chk_force = false;
  chk->add_option("--assumption", which, "tsp | esp | smr | graphoid")
      ->required()
      ->check(CLI::IsMember({"tsp", "esp", "smr", "graphoid"}));
  chk->add_option("--relations", chk_rel, "CI relations file")->required();
  chk->add_option("--nodes", chk_nodes, "Number of nodes")->required()->check(CLI::Range(1, 256));
  chk->add_flag("--force", chk_force, "Raise the enumeration guard");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sim->parsed()) return simulate(sim_nodes, sim_density, sim_samples, sim_seed, sim_out, out);
    if (lrn->parsed()) return learn(lo, out);
    if (bench->parsed()) {
      const BenchGrid grid = parse_bench_grid(read_file(grid_path));
      const std::vector<TrialRecord> records = run_benchmark(grid, default_workers());
      write_benchmark(bench_out, grid, records);
      long errors = 0;
      for (const TrialRecord& r : records) errors += r.status == "error" ? 1 : 0;
      out << records.size() << " trials (" << errors << " failed), wrote " << bench_out << "\n";
      return kExitOk;
    }
    if (poly->parsed()) return polytope(poly_kind, poly_rel, poly_nodes, poly_force, poly_out, out);
    if (chk->parsed()) return check(which, chk_rel, chk_nodes, chk_force, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const GuardError& e) {
    err << "refused: " << e.what() << "\n";
    return kExitGuard;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace gsp
