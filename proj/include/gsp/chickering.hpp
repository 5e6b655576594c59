#pragma once

#include <utility>
#include <vector>

#include "gsp/graph.hpp"

namespace gsp {

struct ChickeringStep {
  enum class Kind { kAddArrow, kReverseCovered };
  Kind kind = Kind::kAddArrow;
  Arrow arrow{};  // the arrow as it appears in the new graph
  int rule = 0;   // edge-operation step that fired: 4, 6, 7 or 8
};

// g <= h: every d-separation of h holds in g. Checked through the local
// Markov statements of h (v against its non-descendants given its parents).
bool is_independence_map(const Dag& g, const Dag& h);

// One step of Chickering's APPLY-EDGE-OPERATION. Sinks are pruned and ties
// go to the smallest node index. Throws ContractError unless g <= h, g != h.
std::pair<Dag, ChickeringStep> apply_edge_operation(const Dag& g, const Dag& h);

// Repeats the operation until g equals h. The length is bounded by r + 2m
// (r arrows of h reversed in g, m arrows of h missing from g); exceeding the
// bound throws InvariantError. Throws ContractError unless g <= h.
std::vector<std::pair<Dag, ChickeringStep>> chickering_sequence(const Dag& g, const Dag& h);

// r + 2m for the pair.
int chickering_bound(const Dag& g, const Dag& h);

}  // namespace gsp
