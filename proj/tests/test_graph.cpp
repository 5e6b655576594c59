#include <doctest.h>

#include <random>

#include "gsp/errors.hpp"
#include "gsp/graph.hpp"
#include "oracles.hpp"

using namespace gsp;

namespace {

Dag make(int p, std::initializer_list<std::pair<int, int>> arrows) {
  std::vector<Arrow> out;
  for (auto [a, b] : arrows) out.push_back({a - 1, b - 1});
  return Dag::FromArrows(p, out);
}

std::vector<NodeSet> all_subsets(const NodeSet& pool) {
  const auto items = pool.members();
  std::vector<NodeSet> out;
  for (unsigned mask = 0; mask < (1u << items.size()); ++mask) {
    NodeSet s;
    for (std::size_t b = 0; b < items.size(); ++b)
      if (mask & (1u << b)) s.insert(items[b]);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST_CASE("dag construction rejects bad input") {
  CHECK_THROWS_AS(Dag::FromArrows(3, {{0, 0}}), InputError);
  CHECK_THROWS_AS(Dag::FromArrows(3, {{0, 3}}), InputError);
  CHECK_THROWS_AS(Dag::FromArrows(3, {{0, 1}, {1, 0}}), InputError);
  CHECK_THROWS_AS(Dag::FromArrows(3, {{0, 1}, {1, 2}, {2, 0}}), InputError);
  Dag g = make(3, {{1, 2}, {2, 3}});
  CHECK_THROWS_AS(g.add_arrow(2, 0), InputError);
  CHECK_THROWS_AS(g.reverse_arrow(0, 2), std::exception);
  CHECK(g.arrow_count() == 2);
}

TEST_CASE("topological order and ancestry") {
  const Dag g = make(4, {{3, 1}, {1, 2}, {4, 2}});
  CHECK(g.topological_order() == std::vector<Node>{2, 0, 3, 1});
  CHECK(g.ancestors(1) == NodeSet{0, 2, 3});
  CHECK(g.descendants(2) == NodeSet{0, 1});
  CHECK(g.has_directed_path(2, 1));
  CHECK_FALSE(g.has_directed_path(1, 2));
  CHECK(Dag::Complete({2, 0, 1}).arrow_count() == 3);
  CHECK(Dag::Complete({2, 0, 1}).has_arrow(2, 1));
}

TEST_CASE("d-separation on chains and colliders") {
  const Dag chain = make(3, {{1, 2}, {2, 3}});
  CHECK(d_separated(chain, 0, 2, {1}));
  CHECK_FALSE(d_separated(chain, 0, 2, {}));
  const Dag collider = make(3, {{1, 2}, {3, 2}});
  CHECK(d_separated(collider, 0, 2, {}));
  CHECK_FALSE(d_separated(collider, 0, 2, {1}));
  // conditioning on a descendant of the collider also opens it
  const Dag desc = make(4, {{1, 2}, {3, 2}, {2, 4}});
  CHECK_FALSE(d_separated(desc, 0, 2, {3}));
}

TEST_CASE("d-separation argument errors") {
  const Dag g = make(3, {{1, 2}});
  CHECK_THROWS_AS(d_separated(g, 0, 0, {}), InputError);
  CHECK_THROWS_AS(d_separated(g, 0, 1, {1}), InputError);
  CHECK_THROWS_AS(d_separated(g, 0, 5, {}), InputError);
}

TEST_CASE("d-separation agrees with path enumeration on random DAGs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 3 + trial % 5;
    const Dag g = oracle::random_dag(p, 0.45, rng);
    for (Node i = 0; i < p; ++i)
      for (Node j = 0; j < p; ++j) {
        if (i == j) continue;
        for (const NodeSet& s : all_subsets(NodeSet::Range(p).without(i).without(j))) {
          const bool lib = d_separated(g, i, j, s);
          REQUIRE(lib == oracle::path_dsep(g, i, j, s));
          REQUIRE(lib == d_separated(g, j, i, s));
        }
      }
  }
}

TEST_CASE("local Markov property holds for every DAG") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const Dag g = oracle::random_dag(7, 0.4, rng);
    for (Node v = 0; v < 7; ++v) {
      const NodeSet nd = NodeSet::Range(7) - g.descendants(v) - g.parents(v) - NodeSet{v};
      nd.for_each([&](Node u) { CHECK(d_separated(g, v, u, g.parents(v))); });
    }
  }
}

TEST_CASE("covered arrows") {
  CHECK(covered_arrows(make(2, {{1, 2}})) == std::vector<Arrow>{{0, 1}});
  // G_1423 and G_4123 for the relations {1⊥2|4, 1⊥3|2, 2⊥4|{1,3}}
  const Dag g1423 = make(4, {{1, 4}, {4, 2}, {1, 3}, {4, 3}, {2, 3}});
  CHECK(covered_arrows(g1423) == std::vector<Arrow>{{0, 3}});
  const Dag g4123 = make(4, {{4, 1}, {4, 2}, {4, 3}, {1, 3}, {2, 3}});
  CHECK(covered_arrows(g4123) == std::vector<Arrow>{{3, 0}, {3, 1}});
  CHECK_THROWS_AS(reverse_covered(g1423, {3, 1}), ContractError);
  CHECK_THROWS_AS(reverse_covered(g1423, {1, 2}), ContractError);
  const Dag r = reverse_covered(g1423, {0, 3});
  CHECK(r.has_arrow(3, 0));
  CHECK(r.arrow_count() == g1423.arrow_count());
}

TEST_CASE("covered reversals preserve the equivalence class") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Dag g = oracle::random_dag(6, 0.5, rng);
    for (const Arrow& a : covered_arrows(g)) {
      const Dag h = reverse_covered(g, a);
      CHECK(markov_equivalent(g, h));
      CHECK(immoralities(g) == immoralities(h));
      CHECK(g.skeleton() == h.skeleton());
    }
  }
}

TEST_CASE("markov equivalence basics") {
  CHECK(markov_equivalent(make(3, {{1, 2}, {2, 3}}), make(3, {{3, 2}, {2, 1}})));
  CHECK_FALSE(markov_equivalent(make(3, {{1, 2}, {2, 3}}), make(3, {{1, 2}, {3, 2}})));
  CHECK_THROWS_AS(markov_equivalent(Dag(2), Dag(3)), InputError);
}

TEST_CASE("markov equivalence equals connectivity under covered flips") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const int p = 3 + trial % 3;
    const Dag g = oracle::random_dag(p, 0.5, rng);
    const auto cls = oracle::mec_by_flips(g);
    for (int k = 0; k < 20; ++k) {
      const Dag h = oracle::random_dag(p, 0.5, rng);
      const bool in_cls = std::find(cls.begin(), cls.end(), h) != cls.end();
      CHECK(markov_equivalent(g, h) == in_cls);
      CHECK((essential_graph(g) == essential_graph(h)) == in_cls);
    }
    for (const Dag& h : cls) {
      CHECK(markov_equivalent(g, h));
      CHECK(essential_graph(h) == essential_graph(g));
    }
  }
}

TEST_CASE("essential graphs of small DAGs") {
  const Cpdag chain = essential_graph(make(3, {{1, 2}, {2, 3}}));
  CHECK(chain.directed_edges().empty());
  CHECK(chain.undirected_edges().size() == 2);
  const Cpdag coll = essential_graph(make(3, {{1, 2}, {3, 2}}));
  CHECK(coll.directed_edges() == std::vector<Arrow>{{0, 1}, {2, 1}});
  CHECK(coll.undirected_edges().empty());
  // Meek R1 orients the arrow out of the collider
  const Cpdag r1 = essential_graph(make(4, {{1, 3}, {2, 3}, {3, 4}}));
  CHECK(r1.has_directed(2, 3));
}

TEST_CASE("essential graph edges are compelled exactly when fixed across the class") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const Dag g = oracle::random_dag(5, 0.5, rng);
    const Cpdag e = essential_graph(g);
    const auto cls = oracle::mec_by_flips(g);
    for (const Arrow& a : g.arrows()) {
      bool fixed = true;
      for (const Dag& h : cls) fixed = fixed && h.has_arrow(a.from, a.to);
      CHECK(e.has_directed(a.from, a.to) == fixed);
      CHECK(e.has_undirected(a.from, a.to) == !fixed);
    }
    Dag ext;
    REQUIRE(consistent_extension(e, &ext));
    CHECK(markov_equivalent(ext, g));
  }
}

TEST_CASE("consistent extension fails on a chordless undirected cycle") {
  Cpdag c(4);
  c.add_undirected(0, 1);
  c.add_undirected(1, 2);
  c.add_undirected(2, 3);
  c.add_undirected(3, 0);
  Dag ext;
  CHECK_FALSE(consistent_extension(c, &ext));
}

TEST_CASE("structural Hamming distance") {
  const Cpdag a = essential_graph(make(3, {{1, 2}, {2, 3}}));
  CHECK(shd(a, a) == 0);
  Cpdag b = a;
  b.add_undirected(0, 2);
  CHECK(shd(a, b) == 1);
  const Cpdag coll = essential_graph(make(3, {{1, 2}, {3, 2}}));
  CHECK(shd(a, coll) == 2);
  CHECK_THROWS_AS(shd(a, Cpdag(4)), InputError);
  std::mt19937_64 rng(2);
  for (int k = 0; k < 30; ++k) {
    const Cpdag x = essential_graph(oracle::random_dag(6, 0.4, rng));
    const Cpdag y = essential_graph(oracle::random_dag(6, 0.4, rng));
    CHECK(shd(x, y) == shd(y, x));
  }
}

TEST_CASE("permutation basics") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), InputError);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), InputError);
  Permutation p({2, 0, 1, 3});
  CHECK(p.position(1) == 2);
  CHECK(p.prefix(2) == NodeSet{0, 2});
  p.move(3, 0);
  CHECK(p.order() == std::vector<Node>{3, 2, 0, 1});
  p.swap_positions(0, 1);
  CHECK(p.order() == std::vector<Node>{2, 3, 0, 1});
  CHECK(p.position(3) == 1);
  CHECK(Permutation({0, 1, 2}).is_linear_extension_of(make(3, {{1, 3}})));
  CHECK_FALSE(Permutation({2, 1, 0}).is_linear_extension_of(make(3, {{1, 3}})));
}

TEST_CASE("dag hashing is canonical") {
  const Dag a = make(4, {{1, 2}, {3, 4}});
  const Dag b = make(4, {{3, 4}, {1, 2}});
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != make(4, {{2, 1}, {3, 4}}).hash());
}
