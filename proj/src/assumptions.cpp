#include <algorithm>
#include <string>

#include "gsp/errors.hpp"
#include "gsp/polytope.hpp"
#include "gsp/search.hpp"

namespace gsp {

namespace {

void guard(int p, int max_nodes, const char* what) {
  if (p > max_nodes) throw GuardError(std::string(what) + " limited to p <= " + std::to_string(max_nodes));
}

// Calls f(s) for every subset s of `pool`, smallest first; stops when f
// returns true and reports that.
template <typename F>
bool any_subset(const NodeSet& pool, F&& f) {
  const std::vector<Node> items = pool.members();
  const std::uint64_t count = std::uint64_t{1} << items.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    NodeSet s;
    for (std::size_t b = 0; b < items.size(); ++b)
      if (mask & (std::uint64_t{1} << b)) s.insert(items[b]);
    if (f(s)) return true;
  }
  return false;
}

}  // namespace

AssumptionReport check_assumption(const CiOracle& oracle, Assumption which, int max_nodes) {
  const int p = oracle.num_nodes();
  guard(p, max_nodes, "assumption checks");
  const MemoOracle memo(oracle);
  const BruteForceResult bf = sp_brute_force(memo, std::max(p, 1));
  AssumptionReport report;
  report.which = which;
  report.sparsest_arrows = bf.min_arrows;
  const bool unique = bf.classes.size() == 1;
  if (which == Assumption::kSmr) {
    report.holds = unique;
    report.detail = std::to_string(bf.classes.size()) + " sparsest Markov equivalence class(es) with " +
                    std::to_string(bf.min_arrows) + " arrows";
    return report;
  }
  std::optional<QuotientPolytopeGraph> assoc;
  if (which == Assumption::kEsp) assoc.emplace(dag_associahedron_graph(memo, p));
  std::vector<Node> order(p);
  for (int k = 0; k < p; ++k) order[k] = k;
  long starts = 0;
  int witness_arrows = 0;
  do {
    ++starts;
    const Permutation start(order);
    Dag out;
    if (which == Assumption::kTsp) {
      SearchConfig cfg;
      cfg.start = StartKind::kExplicit;
      cfg.start_perm = start;
      out = triangle_sp(memo, cfg).dag();
    } else {
      out = edge_sp(*assoc, start).dag;
    }
    if (!unique || !(essential_graph(out) == bf.classes.front())) {
      report.failing_starts.push_back(start);
      // Witness: the failing start with the sparsest initial I-MAP.
      const int arrows = minimal_imap(start, memo).dag.arrow_count();
      if (!report.witness_start || arrows < witness_arrows) {
        report.witness_start = start;
        report.witness_output = out;
        witness_arrows = arrows;
      }
    }
  } while (std::next_permutation(order.begin(), order.end()));
  report.holds = report.failing_starts.empty();
  report.detail = std::to_string(starts) + " starts, " + std::to_string(report.failing_starts.size()) +
                  " outside the sparsest class (" + std::to_string(bf.min_arrows) + " arrows)";
  if (!unique) report.detail += "; the sparsest class is not unique";
  return report;
}

std::optional<std::pair<CiStatement, bool>> faithfulness_violation(const CiOracle& oracle, const Dag& g,
                                                                   int max_nodes) {
  const int p = g.num_nodes();
  if (oracle.num_nodes() != p) throw InputError("oracle and graph disagree on the node count");
  guard(p, max_nodes, "faithfulness checks");
  std::optional<std::pair<CiStatement, bool>> out;
  for (Node i = 0; i < p && !out; ++i) {
    for (Node j = i + 1; j < p && !out; ++j) {
      any_subset(NodeSet::Range(p).without(i).without(j), [&](const NodeSet& s) {
        const bool claimed = oracle.independent(i, j, s);
        if (claimed == d_separated(g, i, j, s)) return false;
        out.emplace(CiStatement(i, j, s), claimed);
        return true;
      });
    }
  }
  return out;
}

bool is_faithful(const CiOracle& oracle, const Dag& g, int max_nodes) {
  return !faithfulness_violation(oracle, g, max_nodes).has_value();
}

std::optional<TripleViolation> orientation_faithfulness_violation(const CiOracle& oracle, const Dag& g,
                                                                  int max_nodes) {
  const int p = g.num_nodes();
  if (oracle.num_nodes() != p) throw InputError("oracle and graph disagree on the node count");
  guard(p, max_nodes, "faithfulness checks");
  for (Node k = 0; k < p; ++k) {
    const std::vector<Node> nb = g.neighbors(k).members();
    for (std::size_t x = 0; x < nb.size(); ++x) {
      for (std::size_t y = x + 1; y < nb.size(); ++y) {
        const Node i = nb[x];
        const Node j = nb[y];
        if (g.adjacent(i, j)) continue;
        const bool collider = g.has_arrow(i, k) && g.has_arrow(j, k);
        std::optional<TripleViolation> hit;
        any_subset(NodeSet::Range(p).without(i).without(j), [&](const NodeSet& s) {
          if (s.contains(k) != collider) return false;
          if (!oracle.independent(i, j, s)) return false;
          hit = TripleViolation{i, k, j, s};
          return true;
        });
        if (hit) return hit;
      }
    }
  }
  return std::nullopt;
}

std::optional<std::pair<Arrow, NodeSet>> adjacency_faithfulness_violation(const CiOracle& oracle, const Dag& g,
                                                                          int max_nodes) {
  const int p = g.num_nodes();
  if (oracle.num_nodes() != p) throw InputError("oracle and graph disagree on the node count");
  guard(p, max_nodes, "faithfulness checks");
  for (const Arrow& a : g.arrows()) {
    std::optional<std::pair<Arrow, NodeSet>> hit;
    any_subset(NodeSet::Range(p).without(a.from).without(a.to), [&](const NodeSet& s) {
      if (!oracle.independent(a.from, a.to, s)) return false;
      hit.emplace(a, s);
      return true;
    });
    if (hit) return hit;
  }
  return std::nullopt;
}

}  // namespace gsp
