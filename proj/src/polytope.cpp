#include "gsp/polytope.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <json.hpp>

#include "gsp/errors.hpp"
#include "gsp/imap.hpp"
#include "gsp/io.hpp"

namespace gsp {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

std::uint64_t rank_of(const std::vector<Node>& order) {
  const int p = static_cast<int>(order.size());
  std::uint64_t r = 0;
  for (int k = 0; k < p; ++k) {
    int smaller = 0;
    for (int m = k + 1; m < p; ++m)
      if (order[m] < order[k]) ++smaller;
    r = r * static_cast<std::uint64_t>(p - k) + static_cast<std::uint64_t>(smaller);
  }
  return r;
}

Cpdag first_pair_label(const Dag& g, const Permutation& perm) {
  Cpdag out(g.num_nodes());
  const Node a = perm.at(0);
  const Node b = perm.size() > 1 ? perm.at(1) : a;
  for (const Arrow& e : g.arrows()) {
    if ((e.from == a && e.to == b) || (e.from == b && e.to == a)) {
      out.add_undirected(e.from, e.to);
    } else {
      out.add_directed(e.from, e.to);
    }
  }
  return out;
}

std::vector<std::string> arrow_strings(const Dag& g) {
  std::vector<std::string> out;
  for (const Arrow& a : g.arrows()) out.push_back(std::to_string(a.from + 1) + "->" + std::to_string(a.to + 1));
  return out;
}

std::vector<std::string> edge_strings(const Cpdag& g) {
  std::vector<std::string> out;
  for (const Arrow& a : g.directed_edges()) out.push_back(std::to_string(a.from + 1) + "->" + std::to_string(a.to + 1));
  for (const auto& [a, b] : g.undirected_edges()) out.push_back(std::to_string(a + 1) + "--" + std::to_string(b + 1));
  return out;
}

}  // namespace

std::string to_string(PolytopeKind kind) {
  switch (kind) {
    case PolytopeKind::kAssociahedron:
      return "assoc";
    case PolytopeKind::kEvenPermutohedron:
      return "even";
    case PolytopeKind::kEvenAssociahedron:
      return "even-assoc";
  }
  return "unknown";
}

std::uint64_t permutation_rank(const Permutation& perm) { return rank_of(perm.order()); }

QuotientPolytopeGraph QuotientPolytopeGraph::Build(int p, PolytopeKind kind, const CiOracle* oracle, int max_nodes) {
  if (p < 1) throw InputError("polytope needs at least one node");
  if (p > max_nodes) throw GuardError(to_string(kind) + " enumeration limited to p <= " + std::to_string(max_nodes));
  if (kind == PolytopeKind::kEvenPermutohedron && p < 2) throw InputError("even permutohedron needs p >= 2");
  const bool uses_ci = kind != PolytopeKind::kEvenPermutohedron;
  if (uses_ci && oracle == nullptr) throw InputError("associahedra need CI relations");
  if (uses_ci && oracle->num_nodes() != p) throw InputError("relations and node count disagree");
  const bool contract_first = kind != PolytopeKind::kAssociahedron;

  std::vector<std::vector<Node>> perms;
  std::vector<Node> order(p);
  std::iota(order.begin(), order.end(), 0);
  do {
    perms.push_back(order);
  } while (std::next_permutation(order.begin(), order.end()));
  const std::size_t n = perms.size();

  std::optional<MemoOracle> memo;
  if (uses_ci) memo.emplace(*oracle);

  // Uncontracted permutohedron edges are kept for the adjacency pass.
  std::vector<std::pair<std::size_t, std::size_t>> kept;
  UnionFind uf(n);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::vector<Node>& pi = perms[idx];
    NodeSet prefix;
    for (int k = 0; k + 1 < p; ++k) {
      std::vector<Node> nb = pi;
      std::swap(nb[k], nb[k + 1]);
      const std::size_t other = rank_of(nb);
      if (other > idx) {
        bool contract = contract_first && k == 0;
        if (!contract && uses_ci) contract = memo->independent(pi[k], pi[k + 1], prefix);
        if (contract) {
          uf.unite(idx, other);
        } else {
          kept.emplace_back(idx, other);
        }
      }
      prefix.insert(pi[k]);
    }
  }

  QuotientPolytopeGraph g(p, kind);
  g.class_of_rank_.assign(n, -1);
  std::vector<int> class_of_root(n, -1);
  for (std::size_t idx = 0; idx < n; ++idx) {
    const std::size_t root = uf.find(idx);
    if (class_of_root[root] < 0) {
      class_of_root[root] = static_cast<int>(g.classes_.size());
      g.classes_.emplace_back();
    }
    const int c = class_of_root[root];
    g.class_of_rank_[idx] = c;
    g.classes_[c].members.emplace_back(perms[idx]);
  }

  std::vector<std::set<int>> adj(g.classes_.size());
  for (const auto& [a, b] : kept) {
    const int ca = g.class_of_rank_[a];
    const int cb = g.class_of_rank_[b];
    if (ca == cb) continue;
    adj[ca].insert(cb);
    adj[cb].insert(ca);
  }
  for (const auto& s : adj) g.adjacency_.emplace_back(s.begin(), s.end());

  if (uses_ci) {
    for (PolytopeClass& cls : g.classes_) {
      for (const Permutation& perm : cls.members) {
        Dag imap = minimal_imap(perm, *memo).dag;
        if (kind == PolytopeKind::kEvenAssociahedron) {
          Cpdag label = first_pair_label(imap, perm);
          if (std::find(cls.labels.begin(), cls.labels.end(), label) == cls.labels.end()) cls.labels.push_back(label);
        }
        if (std::find(cls.imaps.begin(), cls.imaps.end(), imap) == cls.imaps.end()) cls.imaps.push_back(std::move(imap));
      }
      std::sort(cls.imaps.begin(), cls.imaps.end(), [](const Dag& x, const Dag& y) {
        if (x.arrow_count() != y.arrow_count()) return x.arrow_count() < y.arrow_count();
        return x.hash() < y.hash();
      });
      if (kind == PolytopeKind::kAssociahedron && cls.imaps.size() > 1) g.ambiguous_ = true;
    }
  }
  return g;
}

int QuotientPolytopeGraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& a : adjacency_) total += a.size();
  return static_cast<int>(total / 2);
}

int QuotientPolytopeGraph::class_of(const Permutation& perm) const {
  if (perm.size() != num_nodes_) throw InputError("permutation has the wrong length");
  return class_of_rank_[permutation_rank(perm)];
}

std::string QuotientPolytopeGraph::to_dot() const {
  std::string out = "graph \"" + to_string(kind_) + "\" {\n";
  for (int c = 0; c < num_classes(); ++c) {
    std::string label = io::format_permutation(classes_[c].members.front());
    if (classes_[c].members.size() > 1) label += " (+" + std::to_string(classes_[c].members.size() - 1) + ")";
    if (!classes_[c].imaps.empty()) label += "\\n|G|=" + std::to_string(classes_[c].imaps.front().arrow_count());
    out += "  c" + std::to_string(c) + " [label=\"" + label + "\"];\n";
  }
  for (int c = 0; c < num_classes(); ++c)
    for (int d : adjacency_[c])
      if (c < d) out += "  c" + std::to_string(c) + " -- c" + std::to_string(d) + ";\n";
  out += "}\n";
  return out;
}

std::string QuotientPolytopeGraph::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["kind"] = to_string(kind_);
  j["nodes"] = num_nodes_;
  j["ambiguous_classes"] = ambiguous_;
  nlohmann::json classes = nlohmann::json::array();
  for (int c = 0; c < num_classes(); ++c) {
    nlohmann::json cj;
    cj["id"] = c;
    std::vector<std::string> members;
    for (const Permutation& m : classes_[c].members) members.push_back(io::format_permutation(m));
    cj["members"] = members;
    if (!classes_[c].imaps.empty()) {
      nlohmann::json imaps = nlohmann::json::array();
      for (const Dag& g : classes_[c].imaps) imaps.push_back(arrow_strings(g));
      cj["imaps"] = imaps;
    }
    if (!classes_[c].labels.empty()) {
      nlohmann::json labels = nlohmann::json::array();
      for (const Cpdag& g : classes_[c].labels) labels.push_back(edge_strings(g));
      cj["labels"] = labels;
    }
    cj["neighbors"] = adjacency_[c];
    classes.push_back(std::move(cj));
  }
  j["classes"] = std::move(classes);
  j["edge_count"] = edge_count();
  return j.dump(2) + "\n";
}

QuotientPolytopeGraph dag_associahedron_graph(const CiOracle& oracle, int max_nodes) {
  return QuotientPolytopeGraph::Build(oracle.num_nodes(), PolytopeKind::kAssociahedron, &oracle, max_nodes);
}

QuotientPolytopeGraph dag_associahedron_graph(const CiSet& c, int max_nodes) {
  const ExplicitCiOracle oracle(c);
  return dag_associahedron_graph(oracle, max_nodes);
}

QuotientPolytopeGraph even_permutohedron_graph(int num_nodes, int max_nodes) {
  return QuotientPolytopeGraph::Build(num_nodes, PolytopeKind::kEvenPermutohedron, nullptr, max_nodes);
}

QuotientPolytopeGraph even_associahedron_graph(const CiOracle& oracle, int max_nodes) {
  return QuotientPolytopeGraph::Build(oracle.num_nodes(), PolytopeKind::kEvenAssociahedron, &oracle, max_nodes);
}

std::vector<Cpdag> even_associahedron_vertices(const CiSet& c, int max_nodes) {
  const ExplicitCiOracle oracle(c);
  const QuotientPolytopeGraph g = even_associahedron_graph(oracle, max_nodes);
  std::vector<Cpdag> out;
  for (int k = 0; k < g.num_classes(); ++k) out.push_back(g.cls(k).labels.front());
  return out;
}

std::vector<double> even_perm_coordinates(const PolytopeClass& cls) {
  if (cls.members.size() != 2) throw ContractError("not an even permutohedron class");
  const Permutation& a = cls.members[0];
  const Permutation& b = cls.members[1];
  const int p = a.size();
  if (b.size() != p || p < 2 || a.at(0) != b.at(1) || a.at(1) != b.at(0)) {
    throw ContractError("class members do not differ by a first-pair swap");
  }
  for (int k = 2; k < p; ++k)
    if (a.at(k) != b.at(k)) throw ContractError("class members do not differ by a first-pair swap");
  std::vector<double> x(p);
  for (Node v = 0; v < p; ++v) x[v] = a.position(v) < 2 ? 1.5 : a.position(v) + 1.0;
  return x;
}

EdgeSpResult edge_sp(const QuotientPolytopeGraph& assoc, const Permutation& start, const EdgeSpConfig& cfg) {
  if (assoc.kind() != PolytopeKind::kAssociahedron) throw InputError("Edge SP walks a DAG associahedron");
  if (cfg.depth && *cfg.depth < 1) throw InputError("search depth must be at least 1");
  auto score = [&](int c) { return assoc.cls(c).imaps.front().arrow_count(); };
  EdgeSpResult out;
  int cur = assoc.class_of(start);
  out.walk.push_back(cur);
  struct Frame {
    int cls;
    std::size_t next;
    int depth;
  };
  for (;;) {
    const int root_score = score(cur);
    std::set<int> visited{cur};
    std::vector<Frame> stack{{cur, 0, 0}};
    int found = -1;
    while (!stack.empty() && found < 0) {
      Frame& top = stack.back();
      const auto& nbrs = assoc.neighbors(top.cls);
      if (top.next == nbrs.size()) {
        stack.pop_back();
        continue;
      }
      const int nb = nbrs[top.next++];
      const int depth = top.depth + 1;
      if (!visited.insert(nb).second) continue;
      ++out.visited;
      if (score(nb) < root_score) {
        found = nb;
      } else if ((cfg.allow_increase || score(nb) <= root_score) && (!cfg.depth || depth < *cfg.depth)) {
        stack.push_back(Frame{nb, 0, depth});
      }
    }
    if (found < 0) break;
    cur = found;
    out.walk.push_back(cur);
  }
  out.final_class = cur;
  out.dag = assoc.cls(cur).imaps.front();
  return out;
}

EdgeSpResult edge_sp(const CiOracle& oracle, const Permutation& start, const EdgeSpConfig& cfg, int max_nodes) {
  return edge_sp(dag_associahedron_graph(oracle, max_nodes), start, cfg);
}

}  // namespace gsp
