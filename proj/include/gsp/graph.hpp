#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gsp/node_set.hpp"

namespace gsp {

struct Arrow {
  Node from = 0;
  Node to = 0;
  friend auto operator<=>(const Arrow&, const Arrow&) = default;
};

// Directed acyclic graph on nodes 0..p-1 stored as parent and child bitsets.
// Mutators that could create a cycle check for it and throw InputError.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int num_nodes);

  // Validates range, self-loops, duplicate pairs and acyclicity.
  static Dag FromArrows(int num_nodes, const std::vector<Arrow>& arrows);
  // Complete DAG following the given order (order[0] is a source).
  static Dag Complete(const std::vector<Node>& order);

  int num_nodes() const { return num_nodes_; }
  int arrow_count() const { return arrow_count_; }

  const NodeSet& parents(Node v) const { return parents_[v]; }
  const NodeSet& children(Node v) const { return children_[v]; }
  NodeSet neighbors(Node v) const { return parents_[v] | children_[v]; }

  bool has_arrow(Node from, Node to) const { return children_[from].contains(to); }
  bool adjacent(Node a, Node b) const { return has_arrow(a, b) || has_arrow(b, a); }

  // Adds from->to. Throws InputError if the pair is already adjacent or the
  // arrow closes a directed cycle.
  void add_arrow(Node from, Node to);
  // Adds without the cycle check; the caller guarantees acyclicity (used when
  // arrows follow a known topological order).
  void add_arrow_unchecked(Node from, Node to);
  void remove_arrow(Node from, Node to);
  // Reverses from->to, checking that the result stays acyclic.
  void reverse_arrow(Node from, Node to);

  // Proper ancestors of v.
  NodeSet ancestors(Node v) const;
  // The set plus all ancestors of its members.
  NodeSet ancestral_closure(const NodeSet& s) const;
  // Proper descendants of v.
  NodeSet descendants(Node v) const;
  bool has_directed_path(Node from, Node to) const;

  // Kahn's algorithm with smallest-index tie breaking.
  std::vector<Node> topological_order() const;

  // Sorted (from, to) list; the canonical form used for hashing and output.
  std::vector<Arrow> arrows() const;
  // Unordered adjacency as a symmetric bitset per node.
  std::vector<NodeSet> skeleton() const;

  std::uint64_t hash() const;

  friend bool operator==(const Dag& a, const Dag& b) {
    return a.num_nodes_ == b.num_nodes_ && a.parents_ == b.parents_;
  }

 private:
  void check_node(Node v) const;

  int num_nodes_ = 0;
  int arrow_count_ = 0;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
};

struct DagHasher {
  std::size_t operator()(const Dag& g) const noexcept { return static_cast<std::size_t>(g.hash()); }
};

// Partially directed graph. Used for CPDAGs (essential graphs) and for the
// partially oriented vertex labels of the even DAG associahedron.
class Cpdag {
 public:
  Cpdag() = default;
  explicit Cpdag(int num_nodes);

  int num_nodes() const { return num_nodes_; }

  void add_directed(Node from, Node to);
  void add_undirected(Node a, Node b);
  void remove_edge(Node a, Node b);
  // Turns a-b (undirected) into from->to.
  void orient(Node from, Node to);

  bool has_directed(Node from, Node to) const { return children_[from].contains(to); }
  bool has_undirected(Node a, Node b) const { return undirected_[a].contains(b); }
  bool adjacent(Node a, Node b) const {
    return has_directed(a, b) || has_directed(b, a) || has_undirected(a, b);
  }

  const NodeSet& directed_parents(Node v) const { return parents_[v]; }
  const NodeSet& directed_children(Node v) const { return children_[v]; }
  const NodeSet& undirected_neighbors(Node v) const { return undirected_[v]; }
  NodeSet adjacencies(Node v) const { return parents_[v] | children_[v] | undirected_[v]; }

  std::vector<Arrow> directed_edges() const;
  // Pairs (a, b) with a < b.
  std::vector<std::pair<Node, Node>> undirected_edges() const;
  int edge_count() const;

  friend bool operator==(const Cpdag& a, const Cpdag& b) {
    return a.num_nodes_ == b.num_nodes_ && a.parents_ == b.parents_ && a.undirected_ == b.undirected_;
  }

 private:
  int num_nodes_ = 0;
  std::vector<NodeSet> parents_;
  std::vector<NodeSet> children_;
  std::vector<NodeSet> undirected_;
};

// Total order on 0..p-1 with O(1) position lookup.
class Permutation {
 public:
  Permutation() = default;
  // Throws InputError unless `order` contains each of 0..p-1 exactly once.
  explicit Permutation(std::vector<Node> order);

  static Permutation Identity(int num_nodes);
  template <typename Rng>
  static Permutation Random(int num_nodes, Rng& rng) {
    std::vector<Node> order(num_nodes);
    for (int k = 0; k < num_nodes; ++k) order[k] = k;
    // Fisher-Yates with an explicit index draw so the sequence only depends on
    // the engine, not on the standard library's shuffle.
    for (int k = num_nodes - 1; k > 0; --k) {
      std::uniform_int_distribution<int> pick(0, k);
      std::swap(order[k], order[pick(rng)]);
    }
    return Permutation(std::move(order));
  }

  int size() const { return static_cast<int>(order_.size()); }
  Node at(int position) const { return order_[position]; }
  int position(Node v) const { return position_[v]; }
  const std::vector<Node>& order() const { return order_; }

  // Nodes strictly before `position`.
  NodeSet prefix(int position) const;

  void swap_positions(int a, int b);
  // Moves the node at `from` to `to`, shifting the nodes in between.
  void move(int from, int to);

  bool is_linear_extension_of(const Dag& g) const;

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.order_ == b.order_; }
  friend bool operator<(const Permutation& a, const Permutation& b) { return a.order_ < b.order_; }

 private:
  std::vector<Node> order_;
  std::vector<int> position_;
};

// ---- d-separation -------------------------------------------------------

// True iff i and j are d-separated given s in g. Implemented as reachability
// in the moral graph of the ancestral subgraph of {i, j} ∪ s.
// Throws InputError for out-of-range nodes, i == j, or i/j in s.
bool d_separated(const Dag& g, Node i, Node j, const NodeSet& s);

// ---- covered arrows -----------------------------------------------------

bool is_covered(const Dag& g, Arrow a);
// Arrows i->j with pa(i) = pa(j) \ {i}, sorted lexicographically.
std::vector<Arrow> covered_arrows(const Dag& g);
// Throws ContractError if `a` is not a covered arrow of g.
Dag reverse_covered(const Dag& g, Arrow a);

// ---- Markov equivalence -------------------------------------------------

struct Immorality {
  Node a;  // a < b
  Node collider;
  Node b;
  friend auto operator<=>(const Immorality&, const Immorality&) = default;
};

std::vector<Immorality> immoralities(const Dag& g);
// Same skeleton and same immoralities. Throws InputError on size mismatch.
bool markov_equivalent(const Dag& g, const Dag& h);

// Closes a partially directed graph under Meek's orientation rules R1-R4,
// sweeping pairs in node order until nothing changes.
void apply_meek_rules(Cpdag& g);

// Skeleton with immoralities directed, closed under the Meek rules.
Cpdag essential_graph(const Dag& g);

// A DAG whose essential graph is `g` (Dor-Tarsi extension). Returns false
// if no consistent extension exists.
bool consistent_extension(const Cpdag& g, Dag* out);

// Number of unordered pairs whose status (absent, undirected, a->b, b->a)
// differs. Throws InputError on size mismatch.
int shd(const Cpdag& a, const Cpdag& b);

}  // namespace gsp
