#pragma once

// Independent reference implementations used to validate the library. They
// favour obviousness over speed and share no code with src/ beyond the plain
// Dag/Permutation containers.

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <set>
#include <thread>
#include <tuple>
#include <vector>

#include "gsp/graph.hpp"

namespace oracle {

using gsp::Dag;
using gsp::Node;
using gsp::NodeSet;
using gsp::Permutation;

using Matrix = std::vector<std::vector<bool>>;  // adj[i][j]: arrow i -> j

inline Matrix to_matrix(const Dag& g) {
  const int p = g.num_nodes();
  Matrix m(p, std::vector<bool>(p, false));
  for (const auto& a : g.arrows()) m[a.from][a.to] = true;
  return m;
}

// Ancestors of the set (inclusive) by repeated parent expansion.
inline std::vector<bool> ancestors_of(const Matrix& m, const std::vector<bool>& seed) {
  const int p = static_cast<int>(m.size());
  std::vector<bool> an = seed;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int u = 0; u < p; ++u)
      for (int v = 0; v < p; ++v)
        if (m[u][v] && an[v] && !an[u]) an[u] = grew = true;
  }
  return an;
}

// d-separation by enumerating every simple path between i and j.
inline bool path_dsep(const Dag& g, Node i, Node j, const NodeSet& s) {
  const Matrix m = to_matrix(g);
  const int p = g.num_nodes();
  std::vector<bool> in_s(p, false);
  for (int v = 0; v < p; ++v) in_s[v] = s.contains(v);
  const std::vector<bool> an_s = ancestors_of(m, in_s);
  std::vector<int> path{i};
  std::vector<bool> on_path(p, false);
  on_path[i] = true;
  std::function<bool(int)> open_path = [&](int u) -> bool {
    if (u == j) {
      for (std::size_t k = 1; k + 1 < path.size(); ++k) {
        const int a = path[k - 1], b = path[k], c = path[k + 1];
        const bool collider = m[a][b] && m[c][b];
        if (collider ? !an_s[b] : in_s[b]) return false;
      }
      return true;
    }
    for (int w = 0; w < p; ++w) {
      if (on_path[w] || !(m[u][w] || m[w][u])) continue;
      on_path[w] = true;
      path.push_back(w);
      const bool found = open_path(w);
      path.pop_back();
      on_path[w] = false;
      if (found) return true;
    }
    return false;
  };
  return !open_path(i);
}

inline bool same_mec(const Dag& g, const Dag& h) {
  const Matrix a = to_matrix(g), b = to_matrix(h);
  const int p = g.num_nodes();
  if (p != h.num_nodes()) return false;
  for (int u = 0; u < p; ++u)
    for (int v = 0; v < p; ++v)
      if ((a[u][v] || a[v][u]) != (b[u][v] || b[v][u])) return false;
  auto vstructs = [p](const Matrix& m) {
    std::set<std::tuple<int, int, int>> out;
    for (int c = 0; c < p; ++c)
      for (int u = 0; u < p; ++u)
        for (int v = u + 1; v < p; ++v)
          if (m[u][c] && m[v][c] && !m[u][v] && !m[v][u]) out.insert({u, c, v});
    return out;
  };
  return vstructs(a) == vstructs(b);
}

// Markov equivalence class by breadth-first covered-arrow reversals.
inline std::vector<Dag> mec_by_flips(const Dag& g) {
  std::vector<Dag> seen{g};
  std::deque<Dag> queue{g};
  while (!queue.empty()) {
    const Dag cur = queue.front();
    queue.pop_front();
    for (const auto& a : cur.arrows()) {
      if (cur.parents(a.from) != cur.parents(a.to).without(a.from)) continue;
      Dag next = cur;
      next.remove_arrow(a.from, a.to);
      next.add_arrow_unchecked(a.to, a.from);
      if (std::find(seen.begin(), seen.end(), next) == seen.end()) {
        seen.push_back(next);
        queue.push_back(next);
      }
    }
  }
  return seen;
}

// Minimal I-MAP straight from the definition.
template <typename Indep>
Dag imap_by_definition(const Permutation& perm, Indep&& indep) {
  const int p = perm.size();
  Dag g(p);
  for (int b = 0; b < p; ++b) {
    NodeSet prefix;
    for (int k = 0; k < b; ++k) prefix.insert(perm.at(k));
    for (int a = 0; a < b; ++a) {
      const Node u = perm.at(a), v = perm.at(b);
      if (!indep(u, v, prefix.without(u))) g.add_arrow_unchecked(u, v);
    }
  }
  return g;
}

template <typename Indep>
int brute_min_arrows(int p, Indep&& indep) {
  std::vector<Node> order(p);
  for (int k = 0; k < p; ++k) order[k] = k;
  int best = p * p;
  do {
    best = std::min(best, imap_by_definition(Permutation(order), indep).arrow_count());
  } while (std::next_permutation(order.begin(), order.end()));
  return best;
}

// Partial correlation by the first-order recursion on the conditioning set.
inline double pcorr_recursive(const Eigen::MatrixXd& sigma, int i, int j, std::vector<int> s) {
  if (s.empty()) return sigma(i, j) / std::sqrt(sigma(i, i) * sigma(j, j));
  const int k = s.back();
  s.pop_back();
  const double rij = pcorr_recursive(sigma, i, j, s);
  const double rik = pcorr_recursive(sigma, i, k, s);
  const double rjk = pcorr_recursive(sigma, j, k, s);
  return (rij - rik * rjk) / std::sqrt((1 - rik * rik) * (1 - rjk * rjk));
}

// Random DAG: random topological order, each pair joined with probability q.
inline Dag random_dag(int p, double q, std::mt19937_64& rng) {
  std::vector<Node> order(p);
  for (int k = 0; k < p; ++k) order[k] = k;
  std::shuffle(order.begin(), order.end(), rng);
  std::bernoulli_distribution coin(q);
  Dag g(p);
  for (int a = 0; a < p; ++a)
    for (int b = a + 1; b < p; ++b)
      if (coin(rng)) g.add_arrow_unchecked(order[a], order[b]);
  return g;
}

// Even permutohedron by hand: a class is the permutation with its first two
// entries sorted; edges come from the swaps at positions k, k+1 with k >= 1.
struct EvenGraph {
  std::set<std::vector<int>> vertices;
  std::set<std::pair<std::vector<int>, std::vector<int>>> edges;
};

inline EvenGraph even_by_hand(int p) {
  auto canon = [](std::vector<int> v) {
    if (v.size() >= 2 && v[0] > v[1]) std::swap(v[0], v[1]);
    return v;
  };
  EvenGraph g;
  std::vector<int> order(p);
  for (int k = 0; k < p; ++k) order[k] = k;
  do {
    const auto c = canon(order);
    g.vertices.insert(c);
    for (int k = 1; k + 1 < p; ++k) {
      auto t = order;
      std::swap(t[k], t[k + 1]);
      const auto d = canon(t);
      if (d != c) g.edges.insert({std::min(c, d), std::max(c, d)});
    }
  } while (std::next_permutation(order.begin(), order.end()));
  return g;
}

// Runs f(k) for k in [0, n) on all hardware threads.
template <typename F>
void parallel_for(int n, F&& f) {
  const int workers = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int k = next++; k < n; k = next++) f(k);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace oracle
