#include "gsp/simbench.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <thread>

#include <json.hpp>

#include "gsp/errors.hpp"
#include "gsp/io.hpp"
#include "gsp/mindeg.hpp"
#include "gsp/polytope.hpp"
#include "gsp/search.hpp"

namespace gsp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

std::string compact_edges(const Cpdag& g) {
  std::string out;
  for (const Arrow& a : g.directed_edges()) {
    if (!out.empty()) out += ';';
    out += std::to_string(a.from + 1) + "->" + std::to_string(a.to + 1);
  }
  for (const auto& [a, b] : g.undirected_edges()) {
    if (!out.empty()) out += ';';
    out += std::to_string(a + 1) + "--" + std::to_string(b + 1);
  }
  return out;
}

std::vector<nlohmann::json> as_list(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return {nullptr};
  if (j[key].is_array()) {
    if (j[key].empty()) throw InputError(std::string("grid field '") + key + "' is an empty list");
    return std::vector<nlohmann::json>(j[key].begin(), j[key].end());
  }
  return {j[key]};
}

std::optional<int> parse_depth(const nlohmann::json& v) {
  if (v.is_null()) return std::nullopt;
  if (v.is_string()) {
    if (v == "inf" || v == "unbounded") return std::nullopt;
    throw InputError("depth must be a positive integer or \"inf\"");
  }
  if (!v.is_number_integer() || v.get<int>() < 1) throw InputError("depth must be a positive integer or \"inf\"");
  return v.get<int>();
}

std::string depth_text(const std::optional<int>& d) { return d ? std::to_string(*d) : "inf"; }

const std::vector<std::string> kAlgorithms = {"triangle-sp", "edge-sp", "highdim-sp", "sp", "pc", "bic-sp", "mindeg"};

SearchConfig search_config(const AlgorithmCell& alg, int p, std::uint64_t seed) {
  SearchConfig cfg;
  cfg.depth = alg.depth;
  cfg.runs = alg.runs;
  cfg.seed = seed;
  if (alg.start == "random") {
    cfg.start = StartKind::kRandom;
  } else if (alg.start == "order") {
    cfg.start = StartKind::kOrder;
  } else if (alg.start == "mindeg") {
    cfg.start = StartKind::kMinDegree;
  } else {
    cfg.start = StartKind::kExplicit;
    cfg.start_perm = io::parse_permutation(alg.start, p);
  }
  return cfg;
}

}  // namespace

SemModel random_gaussian_dag(int p, double s, std::mt19937_64& rng) {
  if (p < 2) throw InputError("random DAGs need at least two nodes");
  if (!(s > 0.0) || s > p - 1) throw InputError("expected neighborhood size must lie in (0, p - 1]");
  const double prob = s / (p - 1);
  SemModel m{Dag(p), Eigen::MatrixXd::Zero(p, p)};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(0.25, 1.0);
  for (Node i = 0; i < p; ++i) {
    for (Node j = i + 1; j < p; ++j) {
      if (unit(rng) >= prob) continue;
      const double w = magnitude(rng);
      m.weights(i, j) = unit(rng) < 0.5 ? -w : w;
      m.dag.add_arrow_unchecked(i, j);
    }
  }
  return m;
}

Eigen::MatrixXd sem_covariance(const SemModel& m) {
  const int p = m.dag.num_nodes();
  const Eigen::MatrixXd ia = Eigen::MatrixXd::Identity(p, p) - m.weights;
  const Eigen::MatrixXd inv = ia.inverse();
  Eigen::MatrixXd sigma = inv.transpose() * inv;
  return 0.5 * (sigma + sigma.transpose());
}

Eigen::MatrixXd sem_sample(const SemModel& m, long n, std::mt19937_64& rng) {
  if (n < 1) throw InputError("sample size must be positive");
  const int p = m.dag.num_nodes();
  const std::vector<Node> order = m.dag.topological_order();
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd x(n, p);
  for (long r = 0; r < n; ++r) {
    for (Node v : order) {
      double val = noise(rng);
      m.dag.parents(v).for_each([&](Node u) { val += m.weights(u, v) * x(r, u); });
      x(r, v) = val;
    }
  }
  return x;
}

GaussianSuffStats sem_covariance_and_sample(const SemModel& m, std::optional<long> n, std::mt19937_64& rng) {
  if (!n) return GaussianSuffStats::FromCovariance(sem_covariance(m));
  return GaussianSuffStats::FromSamples(sem_sample(m, *n, rng));
}

AllowedPairs moral_graph(const Dag& g) {
  const int p = g.num_nodes();
  AllowedPairs out(p);
  for (Node v = 0; v < p; ++v) {
    out[v] |= g.neighbors(v);
    const NodeSet pa = g.parents(v);
    pa.for_each([&](Node u) { out[u] |= pa.without(u); });
  }
  return out;
}

Cpdag pc_baseline(const CiOracle& oracle) {
  const int p = oracle.num_nodes();
  std::vector<NodeSet> adj(p);
  for (Node v = 0; v < p; ++v) adj[v] = NodeSet::Range(p).without(v);
  std::map<std::pair<Node, Node>, NodeSet> sepset;

  for (int level = 0;; ++level) {
    const std::vector<NodeSet> frozen = adj;
    bool any = false;
    for (Node i = 0; i < p; ++i) {
      for (Node j = i + 1; j < p; ++j) {
        if (!adj[i].contains(j)) continue;
        for (const auto& [x, y] : {std::pair{i, j}, std::pair{j, i}}) {
          if (!adj[i].contains(j)) break;
          const std::vector<Node> pool = frozen[x].without(y).members();
          if (static_cast<int>(pool.size()) < level) continue;
          any = true;
          // Subsets of size `level` in lexicographic order.
          std::vector<int> idx(level);
          for (int k = 0; k < level; ++k) idx[k] = k;
          for (;;) {
            NodeSet s;
            for (int k : idx) s.insert(pool[k]);
            if (oracle.independent(i, j, s)) {
              adj[i].erase(j);
              adj[j].erase(i);
              sepset[{i, j}] = s;
              break;
            }
            int k = level - 1;
            while (k >= 0 && idx[k] == static_cast<int>(pool.size()) - level + k) --k;
            if (k < 0) break;
            ++idx[k];
            for (int m = k + 1; m < level; ++m) idx[m] = idx[m - 1] + 1;
          }
        }
      }
    }
    if (!any) break;
  }

  Cpdag g(p);
  for (Node i = 0; i < p; ++i)
    for (Node j = i + 1; j < p; ++j)
      if (adj[i].contains(j)) g.add_undirected(i, j);
  for (Node k = 0; k < p; ++k) {
    const std::vector<Node> nb = adj[k].members();
    for (std::size_t a = 0; a < nb.size(); ++a) {
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        const Node i = nb[a];
        const Node j = nb[b];
        if (adj[i].contains(j) || sepset.at({i, j}).contains(k)) continue;
        // First orientation wins when two colliders disagree.
        if (!g.has_directed(k, i)) g.orient(i, k);
        if (!g.has_directed(k, j)) g.orient(j, k);
      }
    }
  }
  apply_meek_rules(g);
  return g;
}

SkeletonCounts skeleton_counts(const Cpdag& truth, const Cpdag& estimate) {
  if (truth.num_nodes() != estimate.num_nodes()) throw InputError("graphs disagree on the node count");
  SkeletonCounts c;
  const int p = truth.num_nodes();
  for (Node i = 0; i < p; ++i) {
    for (Node j = i + 1; j < p; ++j) {
      const bool t = truth.adjacent(i, j);
      const bool e = estimate.adjacent(i, j);
      if (t && e) ++c.tp;
      if (!t && e) ++c.fp;
      if (t && !e) ++c.fn;
    }
  }
  return c;
}

BenchGrid parse_bench_grid(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("grid is not valid JSON: ") + e.what());
  }
  try {
    BenchGrid grid;
    grid.schema_version = j.value("schema_version", 1);
    if (grid.schema_version != 1) throw InputError("unsupported grid schema_version");
    grid.master_seed = j.value("master_seed", std::uint64_t{0});
    grid.replicates = j.value("replicates", 1);
    grid.timeout_seconds = j.value("timeout_seconds", 600.0);
    if (grid.replicates < 1) throw InputError("replicates must be positive");
    if (!(grid.timeout_seconds > 0.0)) throw InputError("timeout_seconds must be positive");
    if (!j.contains("generators") || !j["generators"].is_array() || j["generators"].empty()) {
      throw InputError("grid needs a non-empty 'generators' list");
    }
    if (!j.contains("algorithms") || !j["algorithms"].is_array() || j["algorithms"].empty()) {
      throw InputError("grid needs a non-empty 'algorithms' list");
    }
    for (const auto& gj : j["generators"]) {
      for (const auto& p : as_list(gj, "p"))
        for (const auto& s : as_list(gj, "s"))
          for (const auto& n : as_list(gj, "n")) {
            if (p.is_null() || s.is_null()) throw InputError("generator cells need 'p' and 's'");
            GeneratorCell cell{p.get<int>(), s.get<double>(), n.is_null() ? 0L : n.get<long>()};
            if (cell.p < 2 || !(cell.s > 0.0) || cell.s > cell.p - 1 || cell.n < 0) {
              throw InputError("invalid generator cell p=" + std::to_string(cell.p) + " s=" + fmt(cell.s));
            }
            grid.generators.push_back(cell);
          }
    }
    for (const auto& aj : j["algorithms"]) {
      const std::string algo = aj.value("algo", "");
      if (std::find(kAlgorithms.begin(), kAlgorithms.end(), algo) == kAlgorithms.end()) {
        throw InputError("unknown algorithm '" + algo + "'");
      }
      if (aj.contains("lambda") && aj.contains("alpha")) throw InputError("give either lambda or alpha, not both");
      const std::string start = aj.value("start", "random");
      const bool moral = aj.value("moral", false);
      for (const auto& d : as_list(aj, "depth"))
        for (const auto& r : as_list(aj, "runs"))
          for (const auto& lam : as_list(aj, "lambda"))
            for (const auto& al : as_list(aj, "alpha")) {
              AlgorithmCell cell;
              cell.algo = algo;
              cell.depth = d.is_null() ? std::optional<int>(4) : parse_depth(d);
              cell.runs = r.is_null() ? 1 : r.get<int>();
              cell.start = start;
              cell.moral = moral;
              if (!lam.is_null()) cell.lambda = lam.get<double>();
              if (!al.is_null()) cell.alpha = al.get<double>();
              if (cell.runs < 1) throw InputError("runs must be positive");
              if (cell.lambda && !(*cell.lambda > 0.0)) throw InputError("lambda must be positive");
              if (cell.alpha && !(*cell.alpha > 0.0 && *cell.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
              grid.algorithms.push_back(cell);
            }
    }
    return grid;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed grid: ") + e.what());
  }
}

std::uint64_t trial_data_seed(std::uint64_t master, int generator, int replicate) {
  return splitmix64(splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(generator) + 1)) +
                    static_cast<std::uint64_t>(replicate));
}

TrialRecord run_trial(const BenchGrid& grid, int generator, int algorithm, int replicate, long trial_index) {
  TrialRecord rec;
  rec.trial = trial_index;
  rec.generator = generator;
  rec.algorithm = algorithm;
  rec.replicate = replicate;
  rec.gen = grid.generators.at(generator);
  rec.alg = grid.algorithms.at(algorithm);
  rec.seed = trial_data_seed(grid.master_seed, generator, replicate);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::mt19937_64 rng(rec.seed);
    const SemModel model = random_gaussian_dag(rec.gen.p, rec.gen.s, rng);
    const GaussianSuffStats stats =
        sem_covariance_and_sample(model, rec.gen.n > 0 ? std::optional<long>(rec.gen.n) : std::nullopt, rng);
    const Cpdag truth = essential_graph(model.dag);
    rec.true_arrows = model.dag.arrow_count();
    const std::uint64_t alg_seed = splitmix64(rec.seed ^ splitmix64(static_cast<std::uint64_t>(algorithm) + 101));
    const AlgorithmCell& alg = rec.alg;

    std::unique_ptr<CiOracle> oracle;
    if (alg.lambda) {
      oracle = std::make_unique<GaussianOracle>(GaussianOracle::Threshold(stats, *alg.lambda));
    } else if (alg.alpha) {
      if (rec.gen.n == 0) throw InputError("alpha needs a sample cell");
      oracle = std::make_unique<GaussianOracle>(GaussianOracle::FisherZ(stats, *alg.alpha));
    } else if (rec.gen.n == 0) {
      oracle = std::make_unique<DsepOracle>(model.dag);
    } else if (alg.algo != "bic-sp") {
      throw InputError("sample cells need lambda or alpha");
    }

    SearchConfig cfg = search_config(alg, rec.gen.p, alg_seed);
    cfg.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(grid.timeout_seconds));
    Cpdag estimate;
    int arrows = 0;
    if (alg.algo == "triangle-sp" || alg.algo == "highdim-sp" || alg.algo == "bic-sp") {
      SearchResult r;
      if (alg.algo == "triangle-sp") {
        r = triangle_sp(*oracle, cfg);
      } else if (alg.algo == "highdim-sp") {
        const AllowedPairs moral = moral_graph(model.dag);
        r = highdim_greedy_sp(*oracle, cfg, alg.moral ? &moral : nullptr);
      } else {
        if (rec.gen.n == 0) throw InputError("bic-sp needs a sample cell");
        r = triangle_sp_bic(stats, cfg);
      }
      if (r.trace.termination == "deadline") rec.status = "timeout";
      estimate = essential_graph(r.dag());
      arrows = r.dag().arrow_count();
    } else if (alg.algo == "edge-sp") {
      std::mt19937_64 arng(alg_seed);
      Permutation start = cfg.start == StartKind::kExplicit ? *cfg.start_perm
                          : cfg.start == StartKind::kOrder  ? Permutation::Identity(rec.gen.p)
                          : cfg.start == StartKind::kMinDegree ? neighbor_min_degree(*oracle, arng).perm
                                                               : Permutation::Random(rec.gen.p, arng);
      EdgeSpConfig ecfg;
      ecfg.depth = alg.depth;
      const Dag out = edge_sp(*oracle, start, ecfg).dag;
      estimate = essential_graph(out);
      arrows = out.arrow_count();
    } else if (alg.algo == "sp") {
      const BruteForceResult bf = sp_brute_force(*oracle);
      estimate = essential_graph(bf.sparsest.front());
      arrows = bf.min_arrows;
    } else if (alg.algo == "pc") {
      estimate = pc_baseline(*oracle);
      arrows = estimate.edge_count();
    } else {
      std::mt19937_64 arng(alg_seed);
      const Dag out = neighbor_min_degree(*oracle, arng).imap.dag;
      estimate = essential_graph(out);
      arrows = out.arrow_count();
    }
    rec.arrows = arrows;
    rec.shd = shd(truth, estimate);
    rec.exact = estimate == truth;
    rec.skeleton = skeleton_counts(truth, estimate);
    rec.cpdag = compact_edges(estimate);
  } catch (const std::exception& e) {
    rec.status = "error";
    rec.message = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<TrialRecord> run_benchmark(const BenchGrid& grid, int workers) {
  struct Job {
    int g;
    int a;
    int r;
  };
  std::vector<Job> jobs;
  for (int g = 0; g < static_cast<int>(grid.generators.size()); ++g)
    for (int r = 0; r < grid.replicates; ++r)
      for (int a = 0; a < static_cast<int>(grid.algorithms.size()); ++a) jobs.push_back({g, a, r});
  std::vector<TrialRecord> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      out[k] = run_trial(grid, jobs[k].g, jobs[k].a, jobs[k].r, static_cast<long>(k));
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

int default_workers() {
  if (const char* env = std::getenv("GSP_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw InputError("GSP_WORKERS must be a positive integer");
    return static_cast<int>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::string trials_csv(const std::vector<TrialRecord>& records) {
  std::string out =
      "schema_version,trial,generator,algorithm,replicate,seed,p,s,n,algo,depth,runs,start,lambda,alpha,moral,"
      "status,true_arrows,arrows,shd,exact,skel_tp,skel_fp,skel_fn,cpdag,message\n";
  for (const TrialRecord& r : records) {
    out += "1," + std::to_string(r.trial) + "," + std::to_string(r.generator) + "," + std::to_string(r.algorithm) +
           "," + std::to_string(r.replicate) + "," + std::to_string(r.seed) + "," + std::to_string(r.gen.p) + "," +
           fmt(r.gen.s) + "," + std::to_string(r.gen.n) + "," + r.alg.algo + "," + depth_text(r.alg.depth) + "," +
           std::to_string(r.alg.runs) + "," + r.alg.start + "," + (r.alg.lambda ? fmt(*r.alg.lambda) : "") + "," +
           (r.alg.alpha ? fmt(*r.alg.alpha) : "") + "," + (r.alg.moral ? "1" : "0") + "," + r.status + "," +
           std::to_string(r.true_arrows) + "," + std::to_string(r.arrows) + "," + std::to_string(r.shd) + "," +
           (r.exact ? "1" : "0") + "," + std::to_string(r.skeleton.tp) + "," + std::to_string(r.skeleton.fp) + "," +
           std::to_string(r.skeleton.fn) + "," + csv_quote(r.cpdag) + "," + csv_quote(r.message) + "\n";
  }
  return out;
}

std::string timings_csv(const std::vector<TrialRecord>& records) {
  std::string out = "trial,wall_ms\n";
  for (const TrialRecord& r : records) out += std::to_string(r.trial) + "," + fmt(r.wall_ms) + "\n";
  return out;
}

std::string aggregates_json(const BenchGrid& grid, const std::vector<TrialRecord>& records) {
  struct Acc {
    int trials = 0;
    int ok = 0;
    int timeouts = 0;
    int errors = 0;
    int exact = 0;
    double shd = 0.0;
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    double non_edges = 0.0;
  };
  std::map<std::pair<int, int>, Acc> cells;
  for (const TrialRecord& r : records) {
    Acc& a = cells[{r.generator, r.algorithm}];
    ++a.trials;
    if (r.status == "error") {
      ++a.errors;
      continue;
    }
    if (r.status == "timeout") ++a.timeouts;
    ++a.ok;
    a.exact += r.exact ? 1 : 0;
    a.shd += r.shd;
    a.tp += r.skeleton.tp;
    a.fp += r.skeleton.fp;
    a.fn += r.skeleton.fn;
    a.non_edges += r.gen.p * (r.gen.p - 1) / 2.0 - (r.skeleton.tp + r.skeleton.fn);
  }
  nlohmann::json j;
  j["schema_version"] = 1;
  j["master_seed"] = grid.master_seed;
  j["replicates"] = grid.replicates;
  nlohmann::json arr = nlohmann::json::array();
  std::map<std::string, nlohmann::json> roc;
  for (const auto& [key, a] : cells) {
    const GeneratorCell& g = grid.generators[key.first];
    const AlgorithmCell& alg = grid.algorithms[key.second];
    nlohmann::json c;
    c["generator"] = {{"index", key.first}, {"p", g.p}, {"s", g.s}, {"n", g.n}};
    c["algorithm"] = {{"index", key.second}, {"algo", alg.algo}, {"depth", depth_text(alg.depth)},
                      {"runs", alg.runs},    {"start", alg.start}, {"moral", alg.moral}};
    if (alg.lambda) c["algorithm"]["lambda"] = *alg.lambda;
    if (alg.alpha) c["algorithm"]["alpha"] = *alg.alpha;
    c["trials"] = a.trials;
    c["completed"] = a.ok;
    c["timeouts"] = a.timeouts;
    c["errors"] = a.errors;
    const double ok = std::max(a.ok, 1);
    c["recovery"] = a.ok ? a.exact / ok : 0.0;
    c["mean_shd"] = a.ok ? a.shd / ok : 0.0;
    const double tpr = a.tp + a.fn > 0 ? a.tp / (a.tp + a.fn) : 1.0;
    const double fpr = a.non_edges > 0 ? a.fp / a.non_edges : 0.0;
    c["skeleton_tpr"] = tpr;
    c["skeleton_fpr"] = fpr;
    arr.push_back(c);
    if (alg.lambda || alg.alpha) {
      const std::string family = std::to_string(key.first) + "|" + alg.algo + "|" + depth_text(alg.depth) + "|" +
                                 std::to_string(alg.runs) + "|" + alg.start + "|" + (alg.moral ? "1" : "0");
      nlohmann::json& f = roc[family];
      if (f.is_null()) {
        f["generator"] = key.first;
        f["algo"] = alg.algo;
        f["depth"] = depth_text(alg.depth);
        f["runs"] = alg.runs;
        f["start"] = alg.start;
        f["points"] = nlohmann::json::array();
      }
      f["points"].push_back({{alg.lambda ? "lambda" : "alpha", alg.lambda ? *alg.lambda : *alg.alpha},
                             {"tpr", tpr},
                             {"fpr", fpr}});
    }
  }
  j["cells"] = std::move(arr);
  nlohmann::json rocs = nlohmann::json::array();
  for (auto& [k, v] : roc) rocs.push_back(std::move(v));
  j["roc"] = std::move(rocs);
  return j.dump(2) + "\n";
}

void write_benchmark(const std::filesystem::path& dir, const BenchGrid& grid, const std::vector<TrialRecord>& records) {
  std::filesystem::create_directories(dir);
  io::write_text(dir / "trials.csv", trials_csv(records));
  io::write_text(dir / "timings.csv", timings_csv(records));
  io::write_text(dir / "aggregates.json", aggregates_json(grid, records));
}

}  // namespace gsp
