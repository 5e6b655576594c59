#include "gsp/mindeg.hpp"

#include <functional>
#include <string>

#include "gsp/errors.hpp"

namespace gsp {

namespace {

void check_symmetric(const Eigen::MatrixXd& theta) {
  if (theta.rows() != theta.cols()) throw InputError("precision matrix must be square");
  if ((theta - theta.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, theta.cwiseAbs().maxCoeff())) {
    throw InputError("precision matrix must be symmetric");
  }
}

EliminationState initial_state(const CiOracle& oracle) {
  const int p = oracle.num_nodes();
  EliminationState st{NodeSet::Range(p), std::vector<NodeSet>(p), std::vector<int>(p, -1)};
  const NodeSet all = st.remaining;
  for (Node i = 0; i < p; ++i)
    for (Node j = i + 1; j < p; ++j)
      if (!oracle.independent(i, j, all.without(i).without(j))) {
        st.adjacency[i].insert(j);
        st.adjacency[j].insert(i);
      }
  return st;
}

void eliminate_neighbor_based(EliminationState& st, Node k, const CiOracle& oracle) {
  const NodeSet nbrs = st.adjacency[k] & st.remaining;
  st.position[k] = st.remaining.size() - 1;
  st.remaining.erase(k);
  nbrs.for_each([&](Node v) { st.adjacency[v].erase(k); });
  st.adjacency[k] = NodeSet();
  const std::vector<Node> nb = nbrs.members();
  for (std::size_t x = 0; x < nb.size(); ++x) {
    for (std::size_t y = x + 1; y < nb.size(); ++y) {
      const Node i = nb[x];
      const Node j = nb[y];
      bool edge = true;
      if (st.adjacency[i].contains(j)) {
        edge = !oracle.independent(i, j, st.remaining.without(i).without(j));
      }
      if (edge) {
        st.adjacency[i].insert(j);
        st.adjacency[j].insert(i);
      } else {
        st.adjacency[i].erase(j);
        st.adjacency[j].erase(i);
      }
    }
  }
}

void eliminate_classic(EliminationState& st, Node k) {
  const NodeSet nbrs = st.adjacency[k] & st.remaining;
  st.position[k] = st.remaining.size() - 1;
  st.remaining.erase(k);
  nbrs.for_each([&](Node v) {
    st.adjacency[v].erase(k);
    st.adjacency[v] |= nbrs.without(v);
  });
  st.adjacency[k] = NodeSet();
}

Permutation to_permutation(const std::vector<int>& position) {
  std::vector<Node> order(position.size());
  for (std::size_t v = 0; v < position.size(); ++v) order[position[v]] = static_cast<Node>(v);
  return Permutation(std::move(order));
}

EliminationState pattern_state(const Eigen::MatrixXd& theta, double zero_tol) {
  const int p = static_cast<int>(theta.rows());
  return EliminationState{NodeSet::Range(p), precision_pattern(theta, zero_tol), std::vector<int>(p, -1)};
}

}  // namespace

std::vector<Node> EliminationState::min_degree_nodes() const {
  int best = NodeSet::kCapacity + 1;
  std::vector<Node> out;
  remaining.for_each([&](Node v) {
    const int deg = (adjacency[v] & remaining).size();
    if (deg < best) {
      best = deg;
      out.clear();
    }
    if (deg == best) out.push_back(v);
  });
  return out;
}

MinDegreeResult neighbor_min_degree(const CiOracle& oracle, std::mt19937_64& rng) {
  EliminationState st = initial_state(oracle);
  while (!st.remaining.empty()) {
    const std::vector<Node> ties = st.min_degree_nodes();
    std::uniform_int_distribution<int> pick(0, static_cast<int>(ties.size()) - 1);
    eliminate_neighbor_based(st, ties[pick(rng)], oracle);
  }
  Permutation perm = to_permutation(st.position);
  MinimalImap imap = minimal_imap(perm, oracle);
  return MinDegreeResult{std::move(perm), std::move(imap)};
}

MinDegreeResult neighbor_min_degree(const GaussianSuffStats& stats, double tau, std::uint64_t seed) {
  if (!(tau > 0.0)) throw InputError("minimum degree threshold must be positive");
  const GaussianOracle base = GaussianOracle::Threshold(stats, tau);
  const MemoOracle oracle(base);
  std::mt19937_64 rng(seed);
  return neighbor_min_degree(oracle, rng);
}

std::set<Permutation> neighbor_min_degree_all(const CiOracle& oracle, int max_nodes) {
  if (oracle.num_nodes() > max_nodes) {
    throw GuardError("exhaustive tie-break enumeration limited to p <= " + std::to_string(max_nodes));
  }
  std::set<Permutation> out;
  std::function<void(const EliminationState&)> recurse = [&](const EliminationState& st) {
    if (st.remaining.empty()) {
      out.insert(to_permutation(st.position));
      return;
    }
    for (Node k : st.min_degree_nodes()) {
      EliminationState next = st;
      eliminate_neighbor_based(next, k, oracle);
      recurse(next);
    }
  };
  recurse(initial_state(oracle));
  return out;
}

std::vector<NodeSet> precision_pattern(const Eigen::MatrixXd& theta, double zero_tol) {
  check_symmetric(theta);
  const int p = static_cast<int>(theta.rows());
  std::vector<NodeSet> adj(p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      if (i != j && std::abs(theta(i, j)) > zero_tol) adj[i].insert(j);
  return adj;
}

std::set<Permutation> classic_min_degree_all(const Eigen::MatrixXd& theta, double zero_tol, int max_nodes) {
  if (theta.rows() > max_nodes) {
    throw GuardError("exhaustive minimum degree enumeration limited to p <= " + std::to_string(max_nodes));
  }
  std::set<Permutation> out;
  std::function<void(const EliminationState&)> recurse = [&](const EliminationState& st) {
    if (st.remaining.empty()) {
      out.insert(to_permutation(st.position));
      return;
    }
    for (Node k : st.min_degree_nodes()) {
      EliminationState next = st;
      eliminate_classic(next, k);
      recurse(next);
    }
  };
  recurse(pattern_state(theta, zero_tol));
  return out;
}

Permutation classic_min_degree_sample(const Eigen::MatrixXd& theta, std::mt19937_64& rng, double zero_tol) {
  EliminationState st = pattern_state(theta, zero_tol);
  while (!st.remaining.empty()) {
    const std::vector<Node> ties = st.min_degree_nodes();
    std::uniform_int_distribution<int> pick(0, static_cast<int>(ties.size()) - 1);
    eliminate_classic(st, ties[pick(rng)]);
  }
  return to_permutation(st.position);
}

}  // namespace gsp
