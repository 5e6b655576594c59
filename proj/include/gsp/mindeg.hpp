#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "gsp/ci.hpp"
#include "gsp/imap.hpp"

namespace gsp {

// State of a symbolic elimination: nodes not yet eliminated, the current
// undirected graph on them, and the positions handed out so far (-1 while a
// node is still present).
struct EliminationState {
  NodeSet remaining;
  std::vector<NodeSet> adjacency;
  std::vector<int> position;

  // Remaining nodes of smallest degree, in increasing index order.
  std::vector<Node> min_degree_nodes() const;
};

struct MinDegreeResult {
  Permutation perm;
  MinimalImap imap;
};

// Neighbor-based minimum degree. The initial graph joins i and j iff they are
// dependent given all other nodes. Each step draws a lowest-degree node k
// uniformly, removes it, joins its non-adjacent neighbor pairs and retests its
// adjacent neighbor pairs given the remaining nodes minus {i, j}; all other
// pairs keep their status. The first eliminated node takes the last position.
MinDegreeResult neighbor_min_degree(const CiOracle& oracle, std::mt19937_64& rng);
// Gaussian entry point: |ρ̂| > τ counts as an edge.
MinDegreeResult neighbor_min_degree(const GaussianSuffStats& stats, double tau, std::uint64_t seed);

// All permutations the neighbor-based algorithm can output under some
// sequence of tie-breaks. Throws GuardError above `max_nodes`.
std::set<Permutation> neighbor_min_degree_all(const CiOracle& oracle, int max_nodes = 8);

// Nonzero pattern of a precision matrix (|θ_ij| > zero_tol, i != j).
std::vector<NodeSet> precision_pattern(const Eigen::MatrixXd& theta, double zero_tol = 1e-10);

// Classic minimum degree on the pattern of Θ: remove a minimum-degree vertex
// and turn its neighborhood into a clique. Same position convention as above.
std::set<Permutation> classic_min_degree_all(const Eigen::MatrixXd& theta, double zero_tol = 1e-10, int max_nodes = 8);
Permutation classic_min_degree_sample(const Eigen::MatrixXd& theta, std::mt19937_64& rng, double zero_tol = 1e-10);

}  // namespace gsp
