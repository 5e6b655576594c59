#include "gsp/imap.hpp"

#include <string>

#include "gsp/errors.hpp"

namespace gsp {

MinimalImap minimal_imap(const Permutation& perm, const CiOracle& oracle, const AllowedPairs* allowed) {
  const int p = perm.size();
  if (oracle.num_nodes() != p) throw InputError("permutation and oracle disagree on the node count");
  Dag g(p);
  NodeSet prefix;
  for (int b = 0; b < p; ++b) {
    const Node head = perm.at(b);
    prefix.for_each([&](Node tail) {
      if (allowed != nullptr && !(*allowed)[head].contains(tail)) return;
      if (!oracle.independent(tail, head, prefix.without(tail))) g.add_arrow_unchecked(tail, head);
    });
    prefix.insert(head);
  }
  return MinimalImap{std::move(g), perm, oracle.name()};
}

Permutation flip_permutation(const Permutation& perm, Arrow a) {
  Permutation out = perm;
  const int tail_pos = out.position(a.from);
  const int head_pos = out.position(a.to);
  if (tail_pos > head_pos) throw ContractError("permutation is not a linear extension of the arrow being flipped");
  out.move(head_pos, tail_pos + 1);
  out.swap_positions(tail_pos, tail_pos + 1);
  return out;
}

MinimalImap constrained_flip_update(const MinimalImap& m, Arrow a, const CiOracle& oracle, FlipMode mode) {
  if (!is_covered(m.dag, a)) {
    throw ContractError("arrow " + std::to_string(a.from + 1) + " -> " + std::to_string(a.to + 1) + " is not covered");
  }
  Permutation next = flip_permutation(m.perm, a);
  if (mode == FlipMode::kFull) {
    MinimalImap out = minimal_imap(next, oracle);
    return out;
  }
  const Node i = a.from;
  const Node j = a.to;
  MinimalImap out{reverse_covered(m.dag, a), std::move(next), m.source, m.constrained_on_unverified_oracle};
  const NodeSet common = m.dag.parents(i);
  common.for_each([&](Node k) {
    if (oracle.independent(i, k, common.with(j).without(k))) out.dag.remove_arrow(k, i);
    if (oracle.independent(j, k, common.without(k))) out.dag.remove_arrow(k, j);
  });
  if (!oracle.is_graphoid()) out.constrained_on_unverified_oracle = true;
  return out;
}

}  // namespace gsp
