#include "gsp/graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "gsp/errors.hpp"

namespace gsp {

// ---- Dag ----------------------------------------------------------------

Dag::Dag(int num_nodes) : num_nodes_(num_nodes), parents_(num_nodes), children_(num_nodes) {
  if (num_nodes < 0 || num_nodes > NodeSet::kCapacity) {
    throw InputError("node count " + std::to_string(num_nodes) + " outside [0, " +
                     std::to_string(NodeSet::kCapacity) + "]");
  }
}

Dag Dag::FromArrows(int num_nodes, const std::vector<Arrow>& arrows) {
  Dag g(num_nodes);
  for (const Arrow& a : arrows) g.add_arrow(a.from, a.to);
  return g;
}

Dag Dag::Complete(const std::vector<Node>& order) {
  Dag g(static_cast<int>(order.size()));
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) g.add_arrow_unchecked(order[a], order[b]);
  return g;
}

void Dag::check_node(Node v) const {
  if (v < 0 || v >= num_nodes_) {
    throw InputError("node " + std::to_string(v + 1) + " out of range 1.." + std::to_string(num_nodes_));
  }
}

void Dag::add_arrow(Node from, Node to) {
  check_node(from);
  check_node(to);
  if (from == to) throw InputError("self-loop at node " + std::to_string(from + 1));
  if (adjacent(from, to)) {
    throw InputError("nodes " + std::to_string(from + 1) + " and " + std::to_string(to + 1) +
                     " are already adjacent");
  }
  if (has_directed_path(to, from)) {
    throw InputError("arrow " + std::to_string(from + 1) + " -> " + std::to_string(to + 1) +
                     " creates a directed cycle");
  }
  add_arrow_unchecked(from, to);
}

void Dag::add_arrow_unchecked(Node from, Node to) {
  if (children_[from].contains(to)) return;
  children_[from].insert(to);
  parents_[to].insert(from);
  ++arrow_count_;
}

void Dag::remove_arrow(Node from, Node to) {
  if (!has_arrow(from, to)) return;
  children_[from].erase(to);
  parents_[to].erase(from);
  --arrow_count_;
}

void Dag::reverse_arrow(Node from, Node to) {
  if (!has_arrow(from, to)) {
    throw ContractError("no arrow " + std::to_string(from + 1) + " -> " + std::to_string(to + 1));
  }
  remove_arrow(from, to);
  if (has_directed_path(from, to)) {
    add_arrow_unchecked(from, to);
    throw InputError("reversing " + std::to_string(from + 1) + " -> " + std::to_string(to + 1) +
                     " creates a directed cycle");
  }
  add_arrow_unchecked(to, from);
}

NodeSet Dag::ancestors(Node v) const {
  NodeSet seen;
  NodeSet frontier = parents_[v];
  while (!frontier.empty()) {
    seen |= frontier;
    NodeSet next;
    frontier.for_each([&](Node u) { next |= parents_[u]; });
    frontier = next - seen;
  }
  return seen;
}

NodeSet Dag::ancestral_closure(const NodeSet& s) const {
  NodeSet seen = s;
  NodeSet frontier = s;
  while (!frontier.empty()) {
    NodeSet next;
    frontier.for_each([&](Node u) { next |= parents_[u]; });
    frontier = next - seen;
    seen |= frontier;
  }
  return seen;
}

NodeSet Dag::descendants(Node v) const {
  NodeSet seen;
  NodeSet frontier = children_[v];
  while (!frontier.empty()) {
    seen |= frontier;
    NodeSet next;
    frontier.for_each([&](Node u) { next |= children_[u]; });
    frontier = next - seen;
  }
  return seen;
}

bool Dag::has_directed_path(Node from, Node to) const {
  if (from == to) return true;
  return descendants(from).contains(to);
}

std::vector<Node> Dag::topological_order() const {
  std::vector<int> indegree(num_nodes_);
  NodeSet ready;
  for (Node v = 0; v < num_nodes_; ++v) {
    indegree[v] = parents_[v].size();
    if (indegree[v] == 0) ready.insert(v);
  }
  std::vector<Node> order;
  order.reserve(num_nodes_);
  while (!ready.empty()) {
    Node v = ready.first();
    ready.erase(v);
    order.push_back(v);
    children_[v].for_each([&](Node c) {
      if (--indegree[c] == 0) ready.insert(c);
    });
  }
  if (static_cast<int>(order.size()) != num_nodes_) throw InvariantError("graph contains a directed cycle");
  return order;
}

std::vector<Arrow> Dag::arrows() const {
  std::vector<Arrow> out;
  out.reserve(arrow_count_);
  for (Node v = 0; v < num_nodes_; ++v) children_[v].for_each([&](Node c) { out.push_back({v, c}); });
  return out;
}

std::vector<NodeSet> Dag::skeleton() const {
  std::vector<NodeSet> adj(num_nodes_);
  for (Node v = 0; v < num_nodes_; ++v) adj[v] = parents_[v] | children_[v];
  return adj;
}

std::uint64_t Dag::hash() const {
  // FNV-1a over the canonical arrow list.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t x) {
    for (int k = 0; k < 8; ++k) {
      h ^= (x >> (8 * k)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<std::uint64_t>(num_nodes_));
  for (Node v = 0; v < num_nodes_; ++v) children_[v].for_each([&](Node c) { mix((std::uint64_t(v) << 32) | c); });
  return h;
}

// ---- Cpdag --------------------------------------------------------------

Cpdag::Cpdag(int num_nodes)
    : num_nodes_(num_nodes), parents_(num_nodes), children_(num_nodes), undirected_(num_nodes) {}

void Cpdag::add_directed(Node from, Node to) {
  remove_edge(from, to);
  children_[from].insert(to);
  parents_[to].insert(from);
}

void Cpdag::add_undirected(Node a, Node b) {
  remove_edge(a, b);
  undirected_[a].insert(b);
  undirected_[b].insert(a);
}

void Cpdag::remove_edge(Node a, Node b) {
  children_[a].erase(b);
  parents_[b].erase(a);
  children_[b].erase(a);
  parents_[a].erase(b);
  undirected_[a].erase(b);
  undirected_[b].erase(a);
}

void Cpdag::orient(Node from, Node to) { add_directed(from, to); }

std::vector<Arrow> Cpdag::directed_edges() const {
  std::vector<Arrow> out;
  for (Node v = 0; v < num_nodes_; ++v) children_[v].for_each([&](Node c) { out.push_back({v, c}); });
  return out;
}

std::vector<std::pair<Node, Node>> Cpdag::undirected_edges() const {
  std::vector<std::pair<Node, Node>> out;
  for (Node v = 0; v < num_nodes_; ++v)
    undirected_[v].for_each([&](Node u) {
      if (v < u) out.emplace_back(v, u);
    });
  return out;
}

int Cpdag::edge_count() const {
  int n = 0;
  for (Node v = 0; v < num_nodes_; ++v) n += children_[v].size() + undirected_[v].size();
  return n - static_cast<int>(undirected_edges().size());
}

// ---- Permutation --------------------------------------------------------

Permutation::Permutation(std::vector<Node> order) : order_(std::move(order)), position_(order_.size(), -1) {
  const int p = static_cast<int>(order_.size());
  for (int k = 0; k < p; ++k) {
    Node v = order_[k];
    if (v < 0 || v >= p || position_[v] != -1) throw InputError("not a permutation of 1.." + std::to_string(p));
    position_[v] = k;
  }
}

Permutation Permutation::Identity(int num_nodes) {
  std::vector<Node> order(num_nodes);
  std::iota(order.begin(), order.end(), 0);
  return Permutation(std::move(order));
}

NodeSet Permutation::prefix(int position) const {
  NodeSet s;
  for (int k = 0; k < position; ++k) s.insert(order_[k]);
  return s;
}

void Permutation::swap_positions(int a, int b) {
  std::swap(order_[a], order_[b]);
  position_[order_[a]] = a;
  position_[order_[b]] = b;
}

void Permutation::move(int from, int to) {
  if (from == to) return;
  Node v = order_[from];
  if (from < to) {
    for (int k = from; k < to; ++k) {
      order_[k] = order_[k + 1];
      position_[order_[k]] = k;
    }
  } else {
    for (int k = from; k > to; --k) {
      order_[k] = order_[k - 1];
      position_[order_[k]] = k;
    }
  }
  order_[to] = v;
  position_[v] = to;
}

bool Permutation::is_linear_extension_of(const Dag& g) const {
  if (g.num_nodes() != size()) return false;
  for (const Arrow& a : g.arrows())
    if (position_[a.from] > position_[a.to]) return false;
  return true;
}

// ---- d-separation -------------------------------------------------------

bool d_separated(const Dag& g, Node i, Node j, const NodeSet& s) {
  const int p = g.num_nodes();
  auto in_range = [p](Node v) { return v >= 0 && v < p; };
  if (!in_range(i) || !in_range(j)) throw InputError("d-separation query node out of range");
  if (i == j) throw InputError("d-separation query needs two distinct nodes");
  if (s.contains(i) || s.contains(j)) throw InputError("conditioning set overlaps the queried nodes");
  bool ok = true;
  s.for_each([&](Node v) { ok = ok && in_range(v); });
  if (!ok) throw InputError("conditioning set node out of range");

  const NodeSet relevant = g.ancestral_closure(s.with(i).with(j));
  // Moralize the ancestral subgraph: parent-child links plus married parents.
  std::vector<NodeSet> adj(p);
  relevant.for_each([&](Node v) {
    const NodeSet& pa = g.parents(v);
    adj[v] |= pa;
    pa.for_each([&](Node u) {
      adj[u].insert(v);
      adj[u] |= pa.without(u);
    });
  });
  NodeSet seen;
  seen.insert(i);
  NodeSet frontier = seen;
  const NodeSet allowed = relevant - s;
  while (!frontier.empty()) {
    NodeSet next;
    frontier.for_each([&](Node v) { next |= adj[v]; });
    next &= allowed;
    next -= seen;
    if (next.contains(j)) return false;
    seen |= next;
    frontier = next;
  }
  return true;
}

// ---- covered arrows -----------------------------------------------------

bool is_covered(const Dag& g, Arrow a) {
  return g.has_arrow(a.from, a.to) && g.parents(a.from) == g.parents(a.to).without(a.from);
}

std::vector<Arrow> covered_arrows(const Dag& g) {
  std::vector<Arrow> out;
  for (const Arrow& a : g.arrows())
    if (is_covered(g, a)) out.push_back(a);
  return out;
}

Dag reverse_covered(const Dag& g, Arrow a) {
  if (!is_covered(g, a)) {
    throw ContractError("arrow " + std::to_string(a.from + 1) + " -> " + std::to_string(a.to + 1) +
                        " is not covered");
  }
  Dag out = g;
  // A covered reversal can never create a cycle.
  out.remove_arrow(a.from, a.to);
  out.add_arrow_unchecked(a.to, a.from);
  return out;
}

// ---- Markov equivalence -------------------------------------------------

std::vector<Immorality> immoralities(const Dag& g) {
  std::vector<Immorality> out;
  for (Node c = 0; c < g.num_nodes(); ++c) {
    const std::vector<Node> pa = g.parents(c).members();
    for (std::size_t x = 0; x < pa.size(); ++x)
      for (std::size_t y = x + 1; y < pa.size(); ++y)
        if (!g.adjacent(pa[x], pa[y])) out.push_back({pa[x], c, pa[y]});
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool markov_equivalent(const Dag& g, const Dag& h) {
  if (g.num_nodes() != h.num_nodes()) throw InputError("graphs have different node counts");
  return g.skeleton() == h.skeleton() && immoralities(g) == immoralities(h);
}

void apply_meek_rules(Cpdag& g) {
  const int p = g.num_nodes();
  bool changed = true;
  while (changed) {
    changed = false;
    for (Node a = 0; a < p; ++a) {
      for (Node b : g.undirected_neighbors(a).members()) {
        if (!g.has_undirected(a, b)) continue;
        bool orient = false;
        // R1: c -> a - b with c, b non-adjacent.
        g.directed_parents(a).for_each([&](Node c) {
          if (!orient && !g.adjacent(c, b)) orient = true;
        });
        // R2: a -> c -> b.
        if (!orient) {
          g.directed_children(a).for_each([&](Node c) {
            if (!orient && g.has_directed(c, b)) orient = true;
          });
        }
        // R3: a - c -> b and a - d -> b with c, d non-adjacent.
        if (!orient) {
          const std::vector<Node> cands = (g.undirected_neighbors(a) & g.directed_parents(b)).members();
          for (std::size_t x = 0; x < cands.size() && !orient; ++x)
            for (std::size_t y = x + 1; y < cands.size() && !orient; ++y)
              if (!g.adjacent(cands[x], cands[y])) orient = true;
        }
        // R4: a - c -> d -> b with a adjacent to d and c, b non-adjacent.
        if (!orient) {
          g.undirected_neighbors(a).for_each([&](Node c) {
            if (orient || c == b || g.adjacent(c, b)) return;
            g.directed_children(c).for_each([&](Node d) {
              if (!orient && g.adjacent(a, d) && g.has_directed(d, b)) orient = true;
            });
          });
        }
        if (orient) {
          g.orient(a, b);
          changed = true;
        }
      }
    }
  }
}

Cpdag essential_graph(const Dag& g) {
  const int p = g.num_nodes();
  Cpdag out(p);
  std::vector<NodeSet> compelled(p);  // compelled[to] holds parents fixed by immoralities
  for (const Immorality& m : immoralities(g)) {
    compelled[m.collider].insert(m.a);
    compelled[m.collider].insert(m.b);
  }
  for (const Arrow& a : g.arrows()) {
    if (compelled[a.to].contains(a.from)) {
      out.add_directed(a.from, a.to);
    } else {
      out.add_undirected(a.from, a.to);
    }
  }
  apply_meek_rules(out);
  return out;
}

bool consistent_extension(const Cpdag& g, Dag* out) {
  const int p = g.num_nodes();
  Cpdag work = g;
  Dag result(p);
  for (const Arrow& a : g.directed_edges()) result.add_arrow_unchecked(a.from, a.to);
  NodeSet alive = NodeSet::Range(p);
  while (!alive.empty()) {
    Node pick = -1;
    alive.for_each([&](Node x) {
      if (pick >= 0) return;
      if (!(work.directed_children(x) & alive).empty()) return;
      const NodeSet nbrs = work.undirected_neighbors(x) & alive;
      const NodeSet adj = work.adjacencies(x) & alive;
      bool ok = true;
      nbrs.for_each([&](Node y) {
        if (!ok) return;
        const NodeSet others = adj.without(y);
        others.for_each([&](Node z) {
          if (ok && !work.adjacent(y, z)) ok = false;
        });
      });
      if (ok) pick = x;
    });
    if (pick < 0) return false;
    (work.undirected_neighbors(pick) & alive).for_each([&](Node y) { result.add_arrow_unchecked(y, pick); });
    alive.erase(pick);
  }
  // Directed cycles cannot appear: each removed node only receives arrows from
  // nodes still alive, which are removed later.
  if (out != nullptr) *out = result;
  return true;
}

int shd(const Cpdag& a, const Cpdag& b) {
  if (a.num_nodes() != b.num_nodes()) throw InputError("CPDAGs have different node counts");
  auto status = [](const Cpdag& g, Node x, Node y) {
    if (g.has_undirected(x, y)) return 1;
    if (g.has_directed(x, y)) return 2;
    if (g.has_directed(y, x)) return 3;
    return 0;
  };
  int d = 0;
  for (Node x = 0; x < a.num_nodes(); ++x)
    for (Node y = x + 1; y < a.num_nodes(); ++y)
      if (status(a, x, y) != status(b, x, y)) ++d;
  return d;
}

}  // namespace gsp
