#include "gsp/chickering.hpp"

#include <string>

#include "gsp/errors.hpp"

namespace gsp {

namespace {

// Descendants of v restricted to `alive`, excluding v.
NodeSet alive_descendants(const Dag& g, Node v, const NodeSet& alive) {
  NodeSet seen;
  std::vector<Node> stack{v};
  while (!stack.empty()) {
    const Node u = stack.back();
    stack.pop_back();
    (g.children(u) & alive).for_each([&](Node c) {
      if (!seen.contains(c)) {
        seen.insert(c);
        stack.push_back(c);
      }
    });
  }
  return seen;
}

// Members of `set` with no ancestor inside `set` (within `alive`).
NodeSet maximal_within(const Dag& g, const NodeSet& set, const NodeSet& alive) {
  NodeSet out;
  set.for_each([&](Node v) {
    if (!(g.ancestors(v) & alive).intersects(set)) out.insert(v);
  });
  return out;
}

}  // namespace

bool is_independence_map(const Dag& g, const Dag& h) {
  if (g.num_nodes() != h.num_nodes()) throw InputError("graphs disagree on the node count");
  const int p = h.num_nodes();
  for (Node v = 0; v < p; ++v) {
    const NodeSet pa = h.parents(v);
    const NodeSet others = NodeSet::Range(p) - h.descendants(v) - pa;
    bool ok = true;
    others.without(v).for_each([&](Node w) {
      if (ok && !d_separated(g, v, w, pa)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

std::pair<Dag, ChickeringStep> apply_edge_operation(const Dag& g, const Dag& h) {
  if (g.num_nodes() != h.num_nodes()) throw ContractError("graphs disagree on the node count");
  if (g == h) throw ContractError("graphs are already equal");
  if (!is_independence_map(g, h)) throw ContractError("first graph is not an independence map of the second");
  const int p = g.num_nodes();
  Dag out = g;

  NodeSet alive = NodeSet::Range(p);
  for (bool pruned = true; pruned;) {
    pruned = false;
    for (Node y = 0; y < p; ++y) {
      if (!alive.contains(y)) continue;
      const bool sink_g = (g.children(y) & alive).empty();
      const bool sink_h = (h.children(y) & alive).empty();
      if (sink_g && sink_h && (g.parents(y) & alive) == (h.parents(y) & alive)) {
        alive.erase(y);
        pruned = true;
      }
    }
  }
  if (alive.empty()) throw InvariantError("sink pruning removed every node of distinct graphs");

  Node y = -1;
  alive.for_each([&](Node v) {
    if (y < 0 && (h.children(v) & alive).empty()) y = v;
  });
  if (y < 0) throw InvariantError("no sink in the pruned target graph");

  if ((g.children(y) & alive).empty()) {
    const NodeSet missing = (h.parents(y) & alive) - g.parents(y);
    if (missing.empty()) throw InvariantError("sink has no parent to add");
    const Node x = missing.first();
    out.add_arrow(x, y);
    return {std::move(out), ChickeringStep{ChickeringStep::Kind::kAddArrow, Arrow{x, y}, 4}};
  }

  const NodeSet desc = alive_descendants(g, y, alive);
  // Maximal within h: no ancestor in h among the descendants.
  NodeSet d_candidates;
  desc.for_each([&](Node v) {
    if (!(h.ancestors(v) & alive).intersects(desc)) d_candidates.insert(v);
  });
  if (d_candidates.empty()) throw InvariantError("no maximal descendant");
  const Node d = d_candidates.first();

  NodeSet via;
  (g.children(y) & alive).for_each([&](Node z) {
    if (z == d || alive_descendants(g, z, alive).contains(d)) via.insert(z);
  });
  const NodeSet maximal = maximal_within(g, via, alive);
  if (maximal.empty()) throw InvariantError("no maximal child leading to the maximal descendant");
  const Node z = maximal.first();

  if (is_covered(g, Arrow{y, z})) {
    out.reverse_arrow(y, z);
    return {std::move(out), ChickeringStep{ChickeringStep::Kind::kReverseCovered, Arrow{z, y}, 6}};
  }
  const NodeSet only_y = g.parents(y) - g.parents(z);
  if (!only_y.empty()) {
    const Node x = only_y.first();
    out.add_arrow(x, z);
    return {std::move(out), ChickeringStep{ChickeringStep::Kind::kAddArrow, Arrow{x, z}, 7}};
  }
  const NodeSet only_z = g.parents(z).without(y) - g.parents(y);
  if (only_z.empty()) throw InvariantError("covered check and parent sets disagree");
  const Node x = only_z.first();
  out.add_arrow(x, y);
  return {std::move(out), ChickeringStep{ChickeringStep::Kind::kAddArrow, Arrow{x, y}, 8}};
}

int chickering_bound(const Dag& g, const Dag& h) {
  if (g.num_nodes() != h.num_nodes()) throw InputError("graphs disagree on the node count");
  int r = 0;
  int m = 0;
  for (const Arrow& a : h.arrows()) {
    if (g.has_arrow(a.to, a.from)) {
      ++r;
    } else if (!g.has_arrow(a.from, a.to)) {
      ++m;
    }
  }
  return r + 2 * m;
}

std::vector<std::pair<Dag, ChickeringStep>> chickering_sequence(const Dag& g, const Dag& h) {
  if (!is_independence_map(g, h)) throw ContractError("first graph is not an independence map of the second");
  const int bound = chickering_bound(g, h);
  std::vector<std::pair<Dag, ChickeringStep>> seq;
  Dag cur = g;
  while (!(cur == h)) {
    if (static_cast<int>(seq.size()) >= bound) {
      throw InvariantError("Chickering sequence exceeded its bound of " + std::to_string(bound) + " steps");
    }
    auto step = apply_edge_operation(cur, h);
    cur = step.first;
    seq.push_back(std::move(step));
  }
  return seq;
}

}  // namespace gsp
