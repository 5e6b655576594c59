#include "gsp/ci.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "gsp/errors.hpp"

namespace gsp {

namespace {

std::string describe_set(const NodeSet& s) {
  std::string out = "{";
  bool first = true;
  s.for_each([&](Node v) {
    if (!first) out += ",";
    out += std::to_string(v + 1);
    first = false;
  });
  return out + "}";
}

}  // namespace

CiStatement::CiStatement(Node a, Node b, NodeSet cond) : i(std::min(a, b)), j(std::max(a, b)), s(cond) {
  if (a == b) throw InputError("CI statement needs two distinct nodes");
  if (s.contains(a) || s.contains(b)) throw InputError("CI statement conditioning set contains an endpoint");
}

void CiSet::insert(const CiStatement& c) {
  int top = std::max(c.i, c.j);
  c.s.for_each([&](Node v) { top = std::max(top, v); });
  if (c.i < 0 || top >= num_nodes_) throw InputError("CI statement node out of range 1.." + std::to_string(num_nodes_));
  set_.insert(c);
}

bool CiSet::contains(Node i, Node j, const NodeSet& s) const {
  CiStatement key;
  key.i = std::min(i, j);
  key.j = std::max(i, j);
  key.s = s;
  return set_.count(key) > 0;
}

std::vector<CiStatement> CiSet::statements() const {
  std::vector<CiStatement> out(set_.begin(), set_.end());
  std::sort(out.begin(), out.end());
  return out;
}

CiSet all_d_separations(const Dag& g) {
  const int p = g.num_nodes();
  if (p > 20) throw GuardError("enumerating all d-separations needs p <= 20");
  CiSet out(p);
  for (Node i = 0; i < p; ++i) {
    for (Node j = i + 1; j < p; ++j) {
      std::vector<Node> rest;
      for (Node v = 0; v < p; ++v)
        if (v != i && v != j) rest.push_back(v);
      const std::uint64_t total = std::uint64_t{1} << rest.size();
      for (std::uint64_t mask = 0; mask < total; ++mask) {
        NodeSet s;
        for (std::size_t b = 0; b < rest.size(); ++b)
          if ((mask >> b) & 1U) s.insert(rest[b]);
        if (d_separated(g, i, j, s)) out.insert(CiStatement(i, j, s));
      }
    }
  }
  return out;
}

bool dsep_oracle_query(const Dag& g, Node i, Node j, const NodeSet& s) { return d_separated(g, i, j, s); }

// ---- Gaussian -----------------------------------------------------------

GaussianSuffStats GaussianSuffStats::FromCovariance(Eigen::MatrixXd sigma, long nominal_n) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0) throw InputError("covariance must be a non-empty square matrix");
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw InputError("covariance is not symmetric");
  }
  sigma = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1e-10) throw InputError("covariance is not positive definite");
  GaussianSuffStats out;
  out.sigma_ = std::move(sigma);
  out.n_ = nominal_n;
  out.exact_ = true;
  return out;
}

GaussianSuffStats GaussianSuffStats::FromSamples(const Eigen::MatrixXd& samples) {
  if (samples.rows() < 2 || samples.cols() == 0) throw InputError("sample matrix needs at least two rows");
  Eigen::MatrixXd sigma = (samples.transpose() * samples) / static_cast<double>(samples.rows());
  sigma = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < 1e-10) throw InputError("sample covariance is not positive definite");
  GaussianSuffStats out;
  out.sigma_ = std::move(sigma);
  out.n_ = static_cast<long>(samples.rows());
  out.exact_ = false;
  return out;
}

Eigen::MatrixXd GaussianSuffStats::precision() const { return sigma_.llt().solve(Eigen::MatrixXd::Identity(num_nodes(), num_nodes())); }

double partial_correlation(const GaussianSuffStats& stats, Node i, Node j, const NodeSet& s) {
  const int p = stats.num_nodes();
  if (i == j || i < 0 || j < 0 || i >= p || j >= p || s.contains(i) || s.contains(j)) {
    throw InputError("partial correlation needs distinct in-range nodes outside the conditioning set");
  }
  const Node a = std::min(i, j);
  const Node b = std::max(i, j);
  std::vector<Node> idx = s.members();
  if (!idx.empty() && idx.back() >= p) throw InputError("conditioning node out of range");
  idx.push_back(a);
  idx.push_back(b);
  const int m = static_cast<int>(idx.size());
  const Eigen::MatrixXd& sigma = stats.covariance();
  // Cholesky of the submatrix ordered (s, a, b); the trailing 2x2 block of
  // the factor is the Cholesky factor of Cov(a, b | s).
  Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c <= r; ++c) {
      double acc = sigma(idx[r], idx[c]);
      for (int k = 0; k < c; ++k) acc -= lower(r, k) * lower(c, k);
      if (r == c) {
        if (acc <= 1e-12 * std::max(1.0, sigma(idx[r], idx[r]))) {
          throw NumericalError("singular covariance submatrix on " + describe_set(s.with(a).with(b)));
        }
        lower(r, r) = std::sqrt(acc);
      } else {
        lower(r, c) = acc / lower(c, c);
      }
    }
  }
  const double off = lower(m - 1, m - 2);
  const double diag = lower(m - 1, m - 1);
  const double rho = off / std::sqrt(off * off + diag * diag);
  return std::clamp(rho, -1.0, 1.0);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0, 1)");
  // Acklam's rational approximation (relative error ~1.2e-9).
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double kLow = 0.02425;
  double x;
  if (p < kLow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - kLow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // Halley refinement against Φ(x) = erfc(-x/√2)/2.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1 + 0.5 * x * u);
}

bool fisher_z_test(double rho_hat, long n, int s_size, double alpha) {
  if (n <= static_cast<long>(s_size) + 3) {
    throw InputError("Fisher z test needs n > |S| + 3 (n = " + std::to_string(n) + ", |S| = " + std::to_string(s_size) + ")");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("significance level must lie in (0, 1)");
  if (!(std::abs(rho_hat) < 1.0)) throw InputError("|partial correlation| must be below 1");
  const double z = std::atanh(rho_hat);
  const double stat = std::sqrt(static_cast<double>(n - s_size - 3)) * std::abs(z);
  return stat <= normal_quantile(1.0 - alpha / 2.0);
}

GaussianOracle GaussianOracle::Threshold(GaussianSuffStats stats, double tau) {
  if (!(tau >= 0.0)) throw InputError("threshold must be non-negative");
  return GaussianOracle(std::move(stats), Mode::kThreshold, tau);
}

GaussianOracle GaussianOracle::FisherZ(GaussianSuffStats stats, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("significance level must lie in (0, 1)");
  if (stats.sample_count() <= 0) throw InputError("Fisher z testing needs a sample count");
  return GaussianOracle(std::move(stats), Mode::kFisherZ, alpha);
}

bool GaussianOracle::independent(Node i, Node j, const NodeSet& s) const {
  const double rho = partial_correlation(stats_, i, j, s);
  if (mode_ == Mode::kThreshold) return std::abs(rho) <= level_;
  // A perfectly correlated sample pair is as dependent as it gets.
  if (std::abs(rho) >= 1.0) return false;
  return fisher_z_test(rho, stats_.sample_count(), s.size(), level_);
}

bool MemoOracle::independent(Node i, Node j, const NodeSet& s) const {
  CiStatement key;
  key.i = std::min(i, j);
  key.j = std::max(i, j);
  key.s = s;
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const bool answer = inner_.independent(key.i, key.j, s);
  std::unique_lock lock(mu_);
  cache_.emplace(key, answer);
  return answer;
}

std::size_t MemoOracle::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

std::vector<std::pair<CiStatement, bool>> MemoOracle::queries() const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<CiStatement, bool>> out(cache_.begin(), cache_.end());
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  return out;
}

// ---- graphoid axioms ----------------------------------------------------

GraphoidReport check_graphoid(const CiSet& c, int num_nodes) {
  GraphoidReport report;
  const std::vector<CiStatement> stmts = c.statements();
  auto st = [](Node a, Node b, const NodeSet& s) { return CiStatement(a, b, s); };

  for (const CiStatement& x : stmts) {
    for (int flip = 0; flip < 2; ++flip) {
      const Node i = flip == 0 ? x.i : x.j;
      const Node j = flip == 0 ? x.j : x.i;
      // (SG2) i⊥j|S and i⊥k|S∪{j}  =>  i⊥k|S and i⊥j|S∪{k}.
      if (report.sg2) {
        for (Node k = 0; k < num_nodes && report.sg2; ++k) {
          if (k == i || k == j || x.s.contains(k)) continue;
          if (!c.contains(i, k, x.s.with(j))) continue;
          for (const CiStatement& need : {st(i, k, x.s), st(i, j, x.s.with(k))}) {
            if (!c.contains(need)) {
              report.sg2 = false;
              report.sg2_witness = GraphoidReport::Counterexample{{x, st(i, k, x.s.with(j))}, need};
              break;
            }
          }
        }
      }
      // (INT) i⊥j|S∪{k} and i⊥k|S∪{j}  =>  i⊥j|S and i⊥k|S.
      if (report.intersection) {
        for (Node k : x.s.members()) {
          if (!report.intersection) break;
          const NodeSet rest = x.s.without(k);
          if (!c.contains(i, k, rest.with(j))) continue;
          for (const CiStatement& need : {st(i, j, rest), st(i, k, rest)}) {
            if (!c.contains(need)) {
              report.intersection = false;
              report.intersection_witness = GraphoidReport::Counterexample{{x, st(i, k, rest.with(j))}, need};
              break;
            }
          }
        }
      }
    }
  }
  // (SG1) holds by construction: statements are stored symmetrically.
  return report;
}

}  // namespace gsp
