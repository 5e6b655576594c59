#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsp/ci.hpp"
#include "gsp/graph.hpp"

namespace gsp {

enum class PolytopeKind { kAssociahedron, kEvenPermutohedron, kEvenAssociahedron };

std::string to_string(PolytopeKind kind);

struct PolytopeClass {
  std::vector<Permutation> members;  // sorted
  // Distinct minimal I-MAPs of the members (associahedra only), sorted by
  // arrow count then hash.
  std::vector<Dag> imaps;
  // Even associahedron labels: I-MAPs with the first-pair arrow unoriented.
  std::vector<Cpdag> labels;
};

// Quotient of the permutohedron edge graph: vertices are classes of
// permutations, adjacency is symmetric, irreflexive and deduplicated.
class QuotientPolytopeGraph {
 public:
  // Contracts the CI-labeled transpositions (when `oracle` is given and the
  // kind is an associahedron) and, for the even kinds, the first-pair swaps.
  static QuotientPolytopeGraph Build(int num_nodes, PolytopeKind kind, const CiOracle* oracle, int max_nodes);

  int num_nodes() const { return num_nodes_; }
  PolytopeKind kind() const { return kind_; }
  int num_classes() const { return static_cast<int>(classes_.size()); }
  const PolytopeClass& cls(int c) const { return classes_[c]; }
  const std::vector<int>& neighbors(int c) const { return adjacency_[c]; }
  int edge_count() const;
  int class_of(const Permutation& perm) const;
  // Set when a class of an associahedron holds more than one distinct I-MAP,
  // which can only happen for non-graphoid relations.
  bool ambiguous_classes() const { return ambiguous_; }

  std::string to_dot() const;
  std::string to_json() const;

 private:
  QuotientPolytopeGraph(int num_nodes, PolytopeKind kind) : num_nodes_(num_nodes), kind_(kind) {}
  int num_nodes_;
  PolytopeKind kind_;
  std::vector<PolytopeClass> classes_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> class_of_rank_;
  bool ambiguous_ = false;
};

// Index of a permutation in the lexicographic order of S_p.
std::uint64_t permutation_rank(const Permutation& perm);

// Contracts every adjacent transposition π_k <-> π_{k+1} whose label
// π_k ⊥ π_{k+1} | {π_1..π_{k-1}} holds. Throws GuardError if p > max_nodes.
QuotientPolytopeGraph dag_associahedron_graph(const CiOracle& oracle, int max_nodes = 7);
QuotientPolytopeGraph dag_associahedron_graph(const CiSet& c, int max_nodes = 7);

// Contracts the swaps of the first two positions.
QuotientPolytopeGraph even_permutohedron_graph(int num_nodes, int max_nodes = 8);

// Contracts both the CI-labeled edges and the first-two-position swaps.
QuotientPolytopeGraph even_associahedron_graph(const CiOracle& oracle, int max_nodes = 7);
std::vector<Cpdag> even_associahedron_vertices(const CiSet& c, int max_nodes = 7);

// Node v sits at its 1-based position, except that the two nodes in the
// first two positions both sit at 3/2. Throws ContractError if the class is
// not a first-pair class.
std::vector<double> even_perm_coordinates(const PolytopeClass& cls);

struct EdgeSpConfig {
  // Let intermediate classes exceed the current arrow count. Off by default:
  // walks are weakly decreasing.
  bool allow_increase = false;
  std::optional<int> depth;
};

struct EdgeSpResult {
  Dag dag;
  int final_class = 0;
  std::vector<int> walk;  // classes at which the walk improved, start first
  long visited = 0;
};

// Edge SP: DFS on the associahedron from the class of `start`, restarting at
// every strictly sparser class. A class scores the fewest arrows among its
// member I-MAPs.
EdgeSpResult edge_sp(const QuotientPolytopeGraph& assoc, const Permutation& start, const EdgeSpConfig& cfg = {});
EdgeSpResult edge_sp(const CiOracle& oracle, const Permutation& start, const EdgeSpConfig& cfg = {},
                     int max_nodes = 7);

}  // namespace gsp
