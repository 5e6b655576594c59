#pragma once

#include <string>
#include <vector>

#include "gsp/ci.hpp"
#include "gsp/graph.hpp"

namespace gsp {

// A permutation DAG G_π together with the permutation that built it.
struct MinimalImap {
  Dag dag;
  Permutation perm;
  std::string source;
  // Set when a constrained update ran on an oracle that is not known to be
  // faithful; the result may then differ from the definition.
  bool constrained_on_unverified_oracle = false;
};

// Optional restriction of the candidate arrows (e.g. a known moral graph):
// allowed[v] lists the nodes v may share an arrow with. Pairs outside it are
// never queried and never joined.
using AllowedPairs = std::vector<NodeSet>;

// Arrow π_a -> π_b (a < b) iff π_a and π_b are dependent given the other
// nodes of the prefix up to position b.
MinimalImap minimal_imap(const Permutation& perm, const CiOracle& oracle, const AllowedPairs* allowed = nullptr);

// Linear extension of the DAG with covered arrow `a` reversed: the head is
// moved right behind the tail, then the two are swapped. `perm` must be a
// linear extension of a DAG in which `a` is covered.
Permutation flip_permutation(const Permutation& perm, Arrow a);

enum class FlipMode { kFull, kConstrained };

// Minimal I-MAP after reversing the covered arrow i->j of m.dag.
// kFull rebuilds from the definition on the flipped permutation.
// kConstrained reverses the arrow and, for each k in S = pa(i), drops k->i iff
// i ⊥ k | (S ∪ {j}) \ {k} and drops k->j iff j ⊥ k | S \ {k}.
// Throws ContractError if the arrow is not covered.
MinimalImap constrained_flip_update(const MinimalImap& m, Arrow a, const CiOracle& oracle, FlipMode mode);

}  // namespace gsp
