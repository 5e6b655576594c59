#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsp/ci.hpp"
#include "gsp/graph.hpp"
#include "gsp/imap.hpp"

namespace gsp {

enum class StartKind { kExplicit, kOrder, kRandom, kMinDegree };
enum class ScoreKind { kSparsity, kBic };

struct SearchConfig {
  std::optional<int> depth;  // nullopt: unbounded
  int runs = 1;
  StartKind start = StartKind::kRandom;
  std::optional<Permutation> start_perm;  // used when start == kExplicit
  ScoreKind score = ScoreKind::kSparsity;
  std::uint64_t seed = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  // τ for the mindeg start of triangle_sp_bic.
  double mindeg_tau = 1e-3;
  // Recompute every constrained flip from the definition and count
  // disagreements in the trace (sparsity searches only).
  bool cross_check_constrained = false;

  // Throws InputError on depth < 1, runs < 1, or a missing explicit start.
  void validate(int num_nodes) const;
};

struct TraceStep {
  int run = 0;
  std::uint64_t hash = 0;
  int arrows = 0;
  double score = 0.0;
  std::string move;  // "start" or "improve"
  std::string perm;
};

struct SearchTrace {
  std::vector<TraceStep> steps;
  long visited = 0;
  long flips = 0;
  long constrained_mismatches = 0;
  std::string termination = "converged";

  // One JSON object per step, then a summary object.
  std::string to_jsonl() const;
};

struct SearchResult {
  MinimalImap best;
  double score = 0.0;  // arrow count, or BIC (higher is better)
  SearchTrace trace;

  const Dag& dag() const { return best.dag; }
};

// Triangle SP: DFS over weakly decreasing covered-flip walks of length up to
// cfg.depth, restarting from every strictly sparser I-MAP; r runs, sparsest
// result wins (ties broken by hash).
SearchResult triangle_sp(const CiOracle& oracle, const SearchConfig& cfg);

// Same walk over BIC-optimal DAGs consistent with each permutation; a move is
// accepted iff the BIC strictly increases. Requires sample_count > 0 (or a
// nominal count for exact covariances).
SearchResult triangle_sp_bic(const GaussianSuffStats& stats, const SearchConfig& cfg);

// Gaussian BIC of g: Σ_v -(n/2)(log(2π σ̂²_v) + 1) - (log n / 2)(|g| + p).
double bic_score(const GaussianSuffStats& stats, const Dag& g);

// Triangle SP with constrained flip updates. `moral` restricts candidate
// arrows when supplied.
SearchResult highdim_greedy_sp(const CiOracle& oracle, const SearchConfig& cfg, const AllowedPairs* moral = nullptr);
SearchResult highdim_greedy_sp(const GaussianSuffStats& stats, double tau, const SearchConfig& cfg,
                               const AllowedPairs* moral = nullptr);

struct BruteForceResult {
  int min_arrows = 0;
  std::vector<Dag> sparsest;         // distinct DAGs, sorted by hash
  std::vector<Cpdag> classes;        // distinct MECs among them
  std::vector<Permutation> minimizers;
};

// Exhaustive SP over all p! minimal I-MAPs. Throws GuardError if p > max_nodes.
BruteForceResult sp_brute_force(const CiOracle& oracle, int max_nodes = 8);

enum class Assumption { kTsp, kEsp, kSmr };

struct AssumptionReport {
  Assumption which = Assumption::kTsp;
  bool holds = true;
  int sparsest_arrows = 0;
  // Starts whose output misses the sparsest MEC, in lexicographic order. The
  // witness is the one with the fewest arrows in its starting I-MAP (first on
  // ties).
  std::vector<Permutation> failing_starts;
  std::optional<Permutation> witness_start;
  std::optional<Dag> witness_output;
  std::string detail;
};

// TSP/ESP: run Triangle SP (unbounded depth) or Edge SP from every start and
// check that the output lies in the unique sparsest MEC. SMR: uniqueness of
// the sparsest MEC. Throws GuardError if p > max_nodes.
AssumptionReport check_assumption(const CiOracle& oracle, Assumption which, int max_nodes = 6);

// Every CI statement of the oracle matches d-separation in g (exhaustive).
bool is_faithful(const CiOracle& oracle, const Dag& g, int max_nodes = 12);

// The first offending statement, if any, when the oracle is not faithful to g.
std::optional<std::pair<CiStatement, bool>> faithfulness_violation(const CiOracle& oracle, const Dag& g,
                                                                   int max_nodes = 12);

// Orientation faithfulness on unshielded triples i - k - j of g: for a
// collider, i and j are dependent given every S containing k; otherwise
// dependent given every S not containing k. Returns the first violation.
struct TripleViolation {
  Node i = 0;
  Node k = 0;
  Node j = 0;
  NodeSet s;
};
std::optional<TripleViolation> orientation_faithfulness_violation(const CiOracle& oracle, const Dag& g,
                                                                  int max_nodes = 12);

// Adjacency faithfulness: every adjacent pair of g is dependent given every
// subset of the other nodes. Returns an offending (arrow, separating set).
std::optional<std::pair<Arrow, NodeSet>> adjacency_faithfulness_violation(const CiOracle& oracle, const Dag& g,
                                                                          int max_nodes = 12);

}  // namespace gsp
