#include "gsp/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gsp/errors.hpp"
#include "gsp/io.hpp"
#include "gsp/mindeg.hpp"

namespace gsp {

void SearchConfig::validate(int num_nodes) const {
  if (depth && *depth < 1) throw InputError("search depth must be at least 1");
  if (runs < 1) throw InputError("number of runs must be at least 1");
  if (start == StartKind::kExplicit) {
    if (!start_perm) throw InputError("explicit start requires a permutation");
    if (start_perm->size() != num_nodes) throw InputError("start permutation has the wrong length");
  }
}

std::string SearchTrace::to_jsonl() const {
  std::string out;
  for (const TraceStep& s : steps) {
    nlohmann::json j = {{"run", s.run},     {"hash", s.hash}, {"arrows", s.arrows},
                        {"score", s.score}, {"move", s.move}, {"perm", s.perm}};
    out += j.dump() + "\n";
  }
  nlohmann::json summary = {{"summary", true},
                            {"visited", visited},
                            {"flips", flips},
                            {"constrained_mismatches", constrained_mismatches},
                            {"termination", termination}};
  out += summary.dump() + "\n";
  return out;
}

namespace {

struct WalkOps {
  std::function<MinimalImap(const Permutation&)> build;
  std::function<MinimalImap(const MinimalImap&, Arrow)> flip;
  // Lower is better.
  std::function<double(const MinimalImap&)> badness;
  // Value written to the trace and returned as the result score.
  std::function<double(const MinimalImap&)> report;
  std::function<Permutation(std::mt19937_64&, int)> start;
};

double tolerance(double reference) { return 1e-9 * (1.0 + std::abs(reference)); }

class Walker {
 public:
  Walker(const WalkOps& ops, const SearchConfig& cfg, SearchTrace& trace) : ops_(ops), cfg_(cfg), trace_(trace) {}

  SearchResult run() {
    std::mt19937_64 rng(cfg_.seed);
    std::optional<MinimalImap> best;
    double best_bad = 0.0;
    for (int r = 0; r < cfg_.runs; ++r) {
      if (r > 0 && expired()) break;
      MinimalImap cur = ops_.build(ops_.start(rng, r));
      double cur_bad = ops_.badness(cur);
      record(r, cur, "start");
      while (auto next = descend(cur, cur_bad)) {
        cur = std::move(*next);
        cur_bad = ops_.badness(cur);
        record(r, cur, "improve");
      }
      const double tol = tolerance(cur_bad);
      if (!best || cur_bad < best_bad - tol ||
          (std::abs(cur_bad - best_bad) <= tol && cur.dag.hash() < best->dag.hash())) {
        best = cur;
        best_bad = cur_bad;
      }
      if (timed_out_) break;
    }
    if (timed_out_) trace_.termination = "deadline";
    SearchResult out{std::move(*best), 0.0, {}};
    out.score = ops_.report(out.best);
    return out;
  }

 private:
  struct Frame {
    MinimalImap state;
    std::vector<Arrow> moves;
    std::size_t next = 0;
    int depth = 0;
  };

  bool expired() {
    if (cfg_.deadline && std::chrono::steady_clock::now() >= *cfg_.deadline) timed_out_ = true;
    return timed_out_;
  }

  void record(int r, const MinimalImap& m, const char* move) {
    trace_.steps.push_back(TraceStep{r, m.dag.hash(), m.dag.arrow_count(), ops_.report(m), move,
                                     io::format_permutation(m.perm)});
  }

  // Depth-first search for a strictly better I-MAP reachable through
  // intermediates that are no worse than the root.
  std::optional<MinimalImap> descend(const MinimalImap& root, double root_bad) {
    const double tol = tolerance(root_bad);
    std::unordered_set<Dag, DagHasher> visited{root.dag};
    std::vector<Frame> stack;
    stack.push_back(Frame{root, covered_arrows(root.dag), 0, 0});
    while (!stack.empty()) {
      if (expired()) return std::nullopt;
      Frame& top = stack.back();
      if (top.next == top.moves.size()) {
        stack.pop_back();
        continue;
      }
      const Arrow a = top.moves[top.next++];
      const int depth = top.depth + 1;
      MinimalImap nb = ops_.flip(top.state, a);
      ++trace_.flips;
      if (!visited.insert(nb.dag).second) continue;
      ++trace_.visited;
      const double bad = ops_.badness(nb);
      if (bad < root_bad - tol) return nb;
      if (bad <= root_bad + tol && (!cfg_.depth || depth < *cfg_.depth)) {
        std::vector<Arrow> moves = covered_arrows(nb.dag);
        stack.push_back(Frame{std::move(nb), std::move(moves), 0, depth});
      }
    }
    return std::nullopt;
  }

  const WalkOps& ops_;
  const SearchConfig& cfg_;
  SearchTrace& trace_;
  bool timed_out_ = false;
};

std::function<Permutation(std::mt19937_64&, int)> start_policy(const SearchConfig& cfg, int p,
                                                               std::function<Permutation(std::mt19937_64&)> mindeg) {
  return [&cfg, p, mindeg = std::move(mindeg)](std::mt19937_64& rng, int run) {
    if (cfg.start == StartKind::kMinDegree) return mindeg(rng);
    if (run > 0 || cfg.start == StartKind::kRandom) return Permutation::Random(p, rng);
    if (cfg.start == StartKind::kOrder) return Permutation::Identity(p);
    return *cfg.start_perm;
  };
}

// Gaussian local BIC scores with a per-(node, parents) cache.
class BicScorer {
 public:
  explicit BicScorer(const GaussianSuffStats& stats) : stats_(stats), n_(static_cast<double>(stats.sample_count())) {
    if (stats.sample_count() <= 0) throw InputError("BIC scoring needs a sample count");
    if (!stats.is_exact() && stats.sample_count() <= stats.num_nodes() + 3) {
      throw InputError("BIC scoring needs n > p + 3 samples");
    }
  }

  double local(Node v, const NodeSet& parents) {
    const auto key = std::make_pair(v, parents);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const Eigen::MatrixXd& s = stats_.covariance();
    double var = s(v, v);
    if (!parents.empty()) {
      const std::vector<Node> pa = parents.members();
      const int k = static_cast<int>(pa.size());
      Eigen::MatrixXd spp(k, k);
      Eigen::VectorXd spv(k);
      for (int a = 0; a < k; ++a) {
        spv(a) = s(pa[a], v);
        for (int b = 0; b < k; ++b) spp(a, b) = s(pa[a], pa[b]);
      }
      Eigen::LLT<Eigen::MatrixXd> llt(spp);
      if (llt.info() != Eigen::Success) throw NumericalError("singular regression of node " + std::to_string(v + 1));
      var -= spv.dot(llt.solve(spv));
    }
    if (!(var > 1e-300)) throw NumericalError("non-positive residual variance for node " + std::to_string(v + 1));
    const double score = -0.5 * n_ * (std::log(2.0 * std::numbers::pi * var) + 1.0) -
                         0.5 * std::log(n_) * (parents.size() + 1);
    cache_.emplace(key, score);
    return score;
  }

  // Highest-scoring parent set among the predecessors; exhaustive for small
  // predecessor sets, forward-backward stepwise otherwise.
  NodeSet best_parents(Node v, const NodeSet& pred) {
    const std::vector<Node> cand = pred.members();
    const int k = static_cast<int>(cand.size());
    if (k <= kExhaustiveLimit) {
      NodeSet best;
      double best_score = local(v, best);
      for (std::uint32_t mask = 1; mask < (1U << k); ++mask) {
        NodeSet s;
        for (int b = 0; b < k; ++b)
          if (mask & (1U << b)) s.insert(cand[b]);
        const double sc = local(v, s);
        if (sc > best_score + tolerance(best_score) ||
            (sc >= best_score - tolerance(best_score) && s.size() < best.size())) {
          best = s;
          best_score = sc;
        }
      }
      return best;
    }
    NodeSet cur;
    double cur_score = local(v, cur);
    for (bool changed = true; changed;) {
      changed = false;
      Node pick = -1;
      double pick_score = cur_score;
      for (Node c : cand) {
        if (cur.contains(c)) continue;
        const double sc = local(v, cur.with(c));
        if (sc > pick_score + tolerance(pick_score)) {
          pick = c;
          pick_score = sc;
        }
      }
      if (pick >= 0) {
        cur.insert(pick);
        cur_score = pick_score;
        changed = true;
      }
    }
    for (bool changed = true; changed;) {
      changed = false;
      Node drop = -1;
      double drop_score = cur_score;
      cur.for_each([&](Node c) {
        const double sc = local(v, cur.without(c));
        if (sc > drop_score + tolerance(drop_score)) {
          drop = c;
          drop_score = sc;
        }
      });
      if (drop >= 0) {
        cur.erase(drop);
        cur_score = drop_score;
        changed = true;
      }
    }
    return cur;
  }

  MinimalImap build(const Permutation& perm) {
    const int p = perm.size();
    Dag g(p);
    NodeSet prefix;
    for (int b = 0; b < p; ++b) {
      const Node v = perm.at(b);
      best_parents(v, prefix).for_each([&](Node u) { g.add_arrow_unchecked(u, v); });
      prefix.insert(v);
    }
    return MinimalImap{std::move(g), perm, "bic"};
  }

  double score(const Dag& g) {
    double total = 0.0;
    for (Node v = 0; v < g.num_nodes(); ++v) total += local(v, g.parents(v));
    return total;
  }

 private:
  static constexpr int kExhaustiveLimit = 12;

  struct KeyHash {
    std::size_t operator()(const std::pair<Node, NodeSet>& k) const noexcept {
      return k.second.hash() ^ (static_cast<std::size_t>(k.first) * 0x9e3779b97f4a7c15ULL);
    }
  };

  const GaussianSuffStats& stats_;
  double n_;
  std::unordered_map<std::pair<Node, NodeSet>, double, KeyHash> cache_;
};

void check_moral(const AllowedPairs* moral, int p) {
  if (moral == nullptr) return;
  if (static_cast<int>(moral->size()) != p) throw InputError("moral graph has the wrong node count");
  for (Node v = 0; v < p; ++v) {
    (*moral)[v].for_each([&](Node u) {
      if (u >= p || u == v || !(*moral)[u].contains(v)) throw InputError("moral graph must be simple and symmetric");
    });
  }
}

}  // namespace

SearchResult triangle_sp(const CiOracle& oracle, const SearchConfig& cfg) {
  const int p = oracle.num_nodes();
  cfg.validate(p);
  if (cfg.score == ScoreKind::kBic) throw InputError("BIC scoring needs Gaussian sufficient statistics");
  const MemoOracle memo(oracle);
  SearchTrace trace;
  WalkOps ops;
  ops.build = [&](const Permutation& perm) { return minimal_imap(perm, memo); };
  ops.flip = [&](const MinimalImap& m, Arrow a) {
    MinimalImap full = constrained_flip_update(m, a, memo, FlipMode::kFull);
    if (cfg.cross_check_constrained) {
      const MinimalImap quick = constrained_flip_update(m, a, memo, FlipMode::kConstrained);
      if (!(quick.dag == full.dag)) ++trace.constrained_mismatches;
    }
    return full;
  };
  ops.badness = [](const MinimalImap& m) { return static_cast<double>(m.dag.arrow_count()); };
  ops.report = ops.badness;
  ops.start = start_policy(cfg, p, [&](std::mt19937_64& rng) { return neighbor_min_degree(memo, rng).perm; });
  Walker walker(ops, cfg, trace);
  SearchResult out = walker.run();
  out.trace = std::move(trace);
  return out;
}

SearchResult triangle_sp_bic(const GaussianSuffStats& stats, const SearchConfig& cfg) {
  const int p = stats.num_nodes();
  cfg.validate(p);
  BicScorer scorer(stats);
  SearchTrace trace;
  WalkOps ops;
  ops.build = [&](const Permutation& perm) { return scorer.build(perm); };
  ops.flip = [&](const MinimalImap& m, Arrow a) {
    if (!is_covered(m.dag, a)) throw ContractError("flip of a non-covered arrow");
    return scorer.build(flip_permutation(m.perm, a));
  };
  ops.badness = [&](const MinimalImap& m) { return -scorer.score(m.dag); };
  ops.report = [&](const MinimalImap& m) { return scorer.score(m.dag); };
  ops.start = start_policy(cfg, p, [&](std::mt19937_64& rng) {
    const GaussianOracle base = GaussianOracle::Threshold(stats, cfg.mindeg_tau);
    const MemoOracle memo(base);
    return neighbor_min_degree(memo, rng).perm;
  });
  Walker walker(ops, cfg, trace);
  SearchResult out = walker.run();
  out.trace = std::move(trace);
  return out;
}

double bic_score(const GaussianSuffStats& stats, const Dag& g) {
  if (g.num_nodes() != stats.num_nodes()) throw InputError("graph and statistics disagree on the node count");
  BicScorer scorer(stats);
  return scorer.score(g);
}

SearchResult highdim_greedy_sp(const CiOracle& oracle, const SearchConfig& cfg, const AllowedPairs* moral) {
  const int p = oracle.num_nodes();
  cfg.validate(p);
  check_moral(moral, p);
  if (cfg.score == ScoreKind::kBic) throw InputError("the high-dimensional search scores by sparsity");
  const MemoOracle memo(oracle);
  SearchTrace trace;
  WalkOps ops;
  ops.build = [&](const Permutation& perm) { return minimal_imap(perm, memo, moral); };
  ops.flip = [&](const MinimalImap& m, Arrow a) {
    MinimalImap quick = constrained_flip_update(m, a, memo, FlipMode::kConstrained);
    if (cfg.cross_check_constrained) {
      const MinimalImap full = minimal_imap(quick.perm, memo, moral);
      if (!(quick.dag == full.dag)) ++trace.constrained_mismatches;
    }
    return quick;
  };
  ops.badness = [](const MinimalImap& m) { return static_cast<double>(m.dag.arrow_count()); };
  ops.report = ops.badness;
  ops.start = start_policy(cfg, p, [&](std::mt19937_64& rng) { return neighbor_min_degree(memo, rng).perm; });
  Walker walker(ops, cfg, trace);
  SearchResult out = walker.run();
  out.trace = std::move(trace);
  return out;
}

SearchResult highdim_greedy_sp(const GaussianSuffStats& stats, double tau, const SearchConfig& cfg,
                               const AllowedPairs* moral) {
  if (!(tau > 0.0)) throw InputError("threshold must be positive");
  const GaussianOracle oracle = GaussianOracle::Threshold(stats, tau);
  return highdim_greedy_sp(oracle, cfg, moral);
}

BruteForceResult sp_brute_force(const CiOracle& oracle, int max_nodes) {
  const int p = oracle.num_nodes();
  if (p > max_nodes) throw GuardError("brute-force SP limited to p <= " + std::to_string(max_nodes));
  const MemoOracle memo(oracle);
  std::vector<Node> order(p);
  for (int k = 0; k < p; ++k) order[k] = k;
  BruteForceResult out;
  out.min_arrows = p * (p - 1) / 2 + 1;
  std::map<std::uint64_t, std::vector<Dag>> by_hash;
  do {
    Permutation perm(order);
    MinimalImap m = minimal_imap(perm, memo);
    const int c = m.dag.arrow_count();
    if (c > out.min_arrows) continue;
    if (c < out.min_arrows) {
      out.min_arrows = c;
      out.minimizers.clear();
      by_hash.clear();
    }
    out.minimizers.push_back(perm);
    auto& bucket = by_hash[m.dag.hash()];
    if (std::find(bucket.begin(), bucket.end(), m.dag) == bucket.end()) bucket.push_back(std::move(m.dag));
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& [h, bucket] : by_hash)
    for (Dag& g : bucket) out.sparsest.push_back(std::move(g));
  for (const Dag& g : out.sparsest) {
    Cpdag e = essential_graph(g);
    if (std::find(out.classes.begin(), out.classes.end(), e) == out.classes.end()) out.classes.push_back(std::move(e));
  }
  return out;
}

}  // namespace gsp
