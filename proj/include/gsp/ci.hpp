#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/node_set.hpp"

namespace gsp {

// A statement i ⊥ j | s, normalized so that i < j.
struct CiStatement {
  Node i = 0;
  Node j = 0;
  NodeSet s;

  CiStatement() = default;
  // Throws InputError if i == j or either endpoint lies in s.
  CiStatement(Node a, Node b, NodeSet cond);

  friend bool operator==(const CiStatement&, const CiStatement&) = default;
  friend bool operator<(const CiStatement& x, const CiStatement& y) {
    if (x.i != y.i) return x.i < y.i;
    if (x.j != y.j) return x.j < y.j;
    if (x.s.size() != y.s.size()) return x.s.size() < y.s.size();
    return x.s < y.s;
  }
};

struct CiStatementHasher {
  std::size_t operator()(const CiStatement& c) const noexcept {
    return c.s.hash() ^ (static_cast<std::size_t>(c.i) * 0x9e3779b1U) ^ (static_cast<std::size_t>(c.j) << 20);
  }
};

// An explicit collection of CI statements over nodes 0..p-1.
class CiSet {
 public:
  CiSet() = default;
  explicit CiSet(int num_nodes) : num_nodes_(num_nodes) {}

  int num_nodes() const { return num_nodes_; }
  void insert(const CiStatement& c);
  bool contains(Node i, Node j, const NodeSet& s) const;
  bool contains(const CiStatement& c) const { return set_.count(c) > 0; }
  std::size_t size() const { return set_.size(); }
  bool empty() const { return set_.empty(); }
  // Deterministic (sorted) listing.
  std::vector<CiStatement> statements() const;

  friend bool operator==(const CiSet& a, const CiSet& b) { return a.set_ == b.set_; }

 private:
  int num_nodes_ = 0;
  std::unordered_set<CiStatement, CiStatementHasher> set_;
};

// Every d-separation statement of g (exhaustive over conditioning sets).
CiSet all_d_separations(const Dag& g);

// Query interface for "i ⊥ j | s". Implementations are deterministic and
// symmetric in (i, j).
class CiOracle {
 public:
  virtual ~CiOracle() = default;
  virtual int num_nodes() const = 0;
  virtual bool independent(Node i, Node j, const NodeSet& s) const = 0;
  // Short identity tag, e.g. "dsep", "relations", "gauss-threshold".
  virtual std::string name() const = 0;
  // True when the backend is known to be a graphoid (d-separation).
  virtual bool is_graphoid() const { return false; }
};

class ExplicitCiOracle final : public CiOracle {
 public:
  explicit ExplicitCiOracle(CiSet c) : c_(std::move(c)) {}
  int num_nodes() const override { return c_.num_nodes(); }
  bool independent(Node i, Node j, const NodeSet& s) const override { return c_.contains(i, j, s); }
  std::string name() const override { return "relations"; }
  const CiSet& relations() const { return c_; }

 private:
  CiSet c_;
};

// Faithful oracle for the d-separation statements of a DAG.
class DsepOracle final : public CiOracle {
 public:
  explicit DsepOracle(Dag g) : g_(std::move(g)) {}
  int num_nodes() const override { return g_.num_nodes(); }
  bool independent(Node i, Node j, const NodeSet& s) const override { return d_separated(g_, i, j, s); }
  std::string name() const override { return "dsep"; }
  bool is_graphoid() const override { return true; }
  const Dag& dag() const { return g_; }

 private:
  Dag g_;
};

bool dsep_oracle_query(const Dag& g, Node i, Node j, const NodeSet& s);

// Either an exact covariance (sample_count == 0 means "population") or a
// sample covariance with its sample count. Samples are treated as zero-mean;
// the covariance uses the 1/n (maximum-likelihood) normalization.
class GaussianSuffStats {
 public:
  GaussianSuffStats() = default;
  // Throws InputError if not square/symmetric or not positive definite
  // (smallest eigenvalue below 1e-10). `nominal_n` lets BIC scoring use an
  // exact covariance as if it came from that many samples.
  static GaussianSuffStats FromCovariance(Eigen::MatrixXd sigma, long nominal_n = 0);
  static GaussianSuffStats FromSamples(const Eigen::MatrixXd& samples);

  int num_nodes() const { return static_cast<int>(sigma_.rows()); }
  const Eigen::MatrixXd& covariance() const { return sigma_; }
  long sample_count() const { return n_; }
  bool is_exact() const { return exact_; }
  // Θ = Σ⁻¹.
  Eigen::MatrixXd precision() const;

 private:
  Eigen::MatrixXd sigma_;
  long n_ = 0;
  bool exact_ = true;
};

// ρ_{i,j|s} from the inverse of the covariance submatrix on {i, j} ∪ s.
// Symmetric in (i, j) bit-for-bit. Throws NumericalError naming the set when
// the submatrix is singular (Cholesky pivot below 1e-12).
double partial_correlation(const GaussianSuffStats& stats, Node i, Node j, const NodeSet& s);

// Φ⁻¹(p): rational approximation refined by one Halley step on erfc.
double normal_quantile(double p);

// Fisher z: independent iff sqrt(n - |s| - 3) * |atanh(ρ̂)| <= Φ⁻¹(1 - α/2).
// Throws InputError if n <= s_size + 3, α outside (0, 1) or |ρ̂| >= 1.
bool fisher_z_test(double rho_hat, long n, int s_size, double alpha);

// Gaussian CI backend. Threshold mode declares independence iff |ρ| <= τ;
// Fisher mode runs fisher_z_test at level α.
class GaussianOracle final : public CiOracle {
 public:
  enum class Mode { kThreshold, kFisherZ };

  static GaussianOracle Threshold(GaussianSuffStats stats, double tau);
  static GaussianOracle FisherZ(GaussianSuffStats stats, double alpha);

  int num_nodes() const override { return stats_.num_nodes(); }
  bool independent(Node i, Node j, const NodeSet& s) const override;
  std::string name() const override { return mode_ == Mode::kThreshold ? "gauss-threshold" : "gauss-fisher"; }
  const GaussianSuffStats& stats() const { return stats_; }
  Mode mode() const { return mode_; }
  double level() const { return level_; }

 private:
  GaussianOracle(GaussianSuffStats stats, Mode mode, double level)
      : stats_(std::move(stats)), mode_(mode), level_(level) {}
  GaussianSuffStats stats_;
  Mode mode_;
  double level_;
};

// Memoizing wrapper. Keyed on (min(i,j), max(i,j), s); safe for concurrent
// queries (shared lock on lookup, exclusive on insert).
class MemoOracle final : public CiOracle {
 public:
  explicit MemoOracle(const CiOracle& inner) : inner_(inner) {}
  int num_nodes() const override { return inner_.num_nodes(); }
  bool independent(Node i, Node j, const NodeSet& s) const override;
  std::string name() const override { return inner_.name(); }
  bool is_graphoid() const override { return inner_.is_graphoid(); }
  std::size_t cache_size() const;
  // Distinct queries answered so far, in sorted order.
  std::vector<std::pair<CiStatement, bool>> queries() const;

 private:
  const CiOracle& inner_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<CiStatement, bool, CiStatementHasher> cache_;
};

struct GraphoidReport {
  struct Counterexample {
    std::vector<CiStatement> premises;
    CiStatement missing;
  };
  bool sg1 = true;
  bool sg2 = true;
  bool intersection = true;
  std::optional<Counterexample> sg1_witness;
  std::optional<Counterexample> sg2_witness;
  std::optional<Counterexample> intersection_witness;
  bool holds() const { return sg1 && sg2 && intersection; }
};

// Closure check under symmetry, the semigraphoid rule and intersection.
// Reports the first counterexample (in sorted statement order) per axiom.
GraphoidReport check_graphoid(const CiSet& c, int num_nodes);

}  // namespace gsp
