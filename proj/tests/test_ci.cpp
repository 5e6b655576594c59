#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gsp/ci.hpp"
#include "gsp/errors.hpp"
#include "gsp/io.hpp"
#include "gsp/simbench.hpp"
#include "oracles.hpp"

using namespace gsp;

namespace {

CiSet relations(const std::string& text, int p) {
  std::istringstream in(text);
  return io::parse_ci_set(in, p);
}

}  // namespace

TEST_CASE("ci statements normalize and validate") {
  const CiStatement c(3, 1, {0});
  CHECK(c.i == 1);
  CHECK(c.j == 3);
  CHECK_THROWS_AS(CiStatement(1, 1, {}), InputError);
  CHECK_THROWS_AS(CiStatement(1, 2, {2}), InputError);
  CiSet set(4);
  set.insert(c);
  CHECK(set.contains(3, 1, {0}));
  CHECK(set.contains(1, 3, {0}));
  CHECK_FALSE(set.contains(1, 3, {}));
}

TEST_CASE("partial correlation examples") {
  Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(4, 4);
  diag(2, 2) = 3.0;
  const auto d = GaussianSuffStats::FromCovariance(diag);
  CHECK(partial_correlation(d, 0, 1, {}) == 0.0);
  CHECK(partial_correlation(d, 0, 3, {1, 2}) == doctest::Approx(0.0));

  Eigen::MatrixXd s(3, 3);
  s << 1, 0.5, 0.5, 0.5, 1, 0.5, 0.5, 0.5, 1;
  const auto st = GaussianSuffStats::FromCovariance(s);
  CHECK(partial_correlation(st, 0, 1, {2}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  Eigen::MatrixXd m(2, 2);
  m << 2.0, 0.6, 0.6, 0.5;
  CHECK(partial_correlation(GaussianSuffStats::FromCovariance(m), 0, 1, {}) ==
        doctest::Approx(0.6 / std::sqrt(1.0)));
}

TEST_CASE("partial correlation matches the recursion and is symmetric") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const SemModel m = random_gaussian_dag(6, 2.0, rng);
    const Eigen::MatrixXd sigma = sem_covariance(m);
    const auto st = GaussianSuffStats::FromCovariance(sigma);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        if (i == j) continue;
        const NodeSet s = NodeSet::Range(6).without(i).without(j);
        std::vector<int> sv = s.members();
        sv.resize(trial % 5);
        const NodeSet sub(sv);
        const double rho = partial_correlation(st, i, j, sub);
        CHECK(rho == partial_correlation(st, j, i, sub));
        CHECK(rho == doctest::Approx(oracle::pcorr_recursive(sigma, i, j, sv)).epsilon(1e-9));
      }
  }
}

TEST_CASE("covariance validation and singular submatrices") {
  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(GaussianSuffStats::FromCovariance(asym), InputError);
  Eigen::MatrixXd notpd(2, 2);
  notpd << 1, 2, 2, 1;
  CHECK_THROWS_AS(GaussianSuffStats::FromCovariance(notpd), InputError);
  CHECK_THROWS_AS(GaussianSuffStats::FromCovariance(Eigen::MatrixXd::Ones(2, 3)), InputError);
  // duplicated column: the sample covariance is singular
  Eigen::MatrixXd x(5, 3);
  x << 1, 1, 2, 2, 2, 1, 3, 3, 0, 4, 4, 5, 5, 5, 1;
  CHECK_THROWS(GaussianSuffStats::FromSamples(x));
}

TEST_CASE("normal quantile") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.999) == doctest::Approx(3.090232306167813).epsilon(1e-10));
  CHECK(normal_quantile(1e-6) == doctest::Approx(-4.753424308822899).epsilon(1e-9));
  for (double q = 0.01; q < 1.0; q += 0.07) {
    const double z = normal_quantile(q);
    CHECK(0.5 * std::erfc(-z / std::sqrt(2.0)) == doctest::Approx(q).epsilon(1e-10));
  }
}

TEST_CASE("fisher z test") {
  CHECK(fisher_z_test(0.0, 10, 2, 0.05));
  const double boundary = std::tanh(normal_quantile(0.975) / 10.0);
  CHECK(fisher_z_test(boundary * (1 - 1e-9), 103, 0, 0.05));
  CHECK_FALSE(fisher_z_test(boundary * (1 + 1e-9), 103, 0, 0.05));
  CHECK_FALSE(fisher_z_test(-boundary * (1 + 1e-9), 103, 0, 0.05));
  // monotone in |rho|
  bool dependent = false;
  for (double r = 0.0; r < 0.99; r += 0.01) {
    const bool dep = !fisher_z_test(r, 200, 3, 0.01);
    CHECK((dep || !dependent));
    dependent = dep;
  }
  CHECK(dependent);
  CHECK_THROWS_AS(fisher_z_test(0.1, 5, 2, 0.05), InputError);
  CHECK_THROWS_AS(fisher_z_test(0.1, 100, 0, 0.0), InputError);
  CHECK_THROWS_AS(fisher_z_test(0.1, 100, 0, 1.0), InputError);
  CHECK_THROWS_AS(fisher_z_test(1.0, 100, 0, 0.05), InputError);
}

TEST_CASE("d-separation oracle matches the enumerated CI set") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Dag g = oracle::random_dag(5, 0.5, rng);
    const CiSet all = all_d_separations(g);
    const DsepOracle dsep(g);
    const ExplicitCiOracle expl(all);
    for (Node i = 0; i < 5; ++i)
      for (Node j = i + 1; j < 5; ++j)
        for (unsigned mask = 0; mask < 32; ++mask) {
          if (mask & ((1u << i) | (1u << j))) continue;
          NodeSet s;
          for (int b = 0; b < 5; ++b)
            if (mask & (1u << b)) s.insert(b);
          CHECK(dsep.independent(i, j, s) == expl.independent(j, i, s));
          CHECK(dsep_oracle_query(g, i, j, s) == oracle::path_dsep(g, i, j, s));
        }
  }
  const Dag chain = Dag::FromArrows(3, {{0, 1}, {1, 2}});
  CHECK(dsep_oracle_query(chain, 0, 2, {1}));
  const Dag coll = Dag::FromArrows(3, {{0, 1}, {2, 1}});
  CHECK_FALSE(dsep_oracle_query(coll, 0, 2, {1}));
}

TEST_CASE("exact Gaussian oracle with small threshold agrees with d-separation") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const int p = 4 + trial % 4;
    const SemModel m = random_gaussian_dag(p, 1.5, rng);
    const GaussianOracle g = GaussianOracle::Threshold(GaussianSuffStats::FromCovariance(sem_covariance(m)), 1e-9);
    const DsepOracle d(m.dag);
    for (Node i = 0; i < p; ++i)
      for (Node j = i + 1; j < p; ++j)
        for (unsigned mask = 0; mask < (1u << p); ++mask) {
          if (mask & ((1u << i) | (1u << j))) continue;
          NodeSet s;
          for (int b = 0; b < p; ++b)
            if (mask & (1u << b)) s.insert(b);
          REQUIRE(g.independent(i, j, s) == d.independent(i, j, s));
        }
  }
}

TEST_CASE("fisher z error rate falls with the sample size") {
  std::vector<double> rates;
  for (long n : {500L, 5000L, 50000L}) {
    long errors = 0, total = 0;
    for (int seed = 0; seed < 50; ++seed) {
      std::mt19937_64 rng(1000 + seed);
      const SemModel m = random_gaussian_dag(5, 1.5, rng);
      const auto st = sem_covariance_and_sample(m, n, rng);
      const GaussianOracle f = GaussianOracle::FisherZ(st, 0.01);
      for (Node i = 0; i < 5; ++i)
        for (Node j = i + 1; j < 5; ++j)
          for (unsigned mask = 0; mask < 32; ++mask) {
            if (mask & ((1u << i) | (1u << j))) continue;
            NodeSet s;
            for (int b = 0; b < 5; ++b)
              if (mask & (1u << b)) s.insert(b);
            errors += f.independent(i, j, s) != d_separated(m.dag, i, j, s);
            ++total;
          }
    }
    rates.push_back(static_cast<double>(errors) / total);
  }
  CHECK(rates[1] < rates[0]);
  CHECK(rates[2] < rates[1]);
}

TEST_CASE("memo oracle caches symmetric queries") {
  const Dag g = Dag::FromArrows(3, {{0, 1}, {1, 2}});
  const DsepOracle d(g);
  const MemoOracle memo(d);
  CHECK(memo.independent(0, 2, {1}));
  CHECK(memo.independent(2, 0, {1}));
  CHECK_FALSE(memo.independent(0, 2, {}));
  CHECK(memo.cache_size() == 2);
  CHECK(memo.queries().size() == 2);
  CHECK(memo.is_graphoid());
}

TEST_CASE("graphoid check") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 5; ++k) {
    const Dag g = oracle::random_dag(5, 0.4, rng);
    CHECK(check_graphoid(all_d_separations(g), 5).holds());
  }
  CHECK(check_graphoid(CiSet(4), 4).holds());

  const CiSet c91 = relations(
      "1 _||_ 5 | 2 3\n2 _||_ 4 | 1 3\n3 _||_ 5 | 1 2 4\n1 _||_ 4 | 2 3 5\n1 _||_ 4 | 2 3\n", 5);
  const GraphoidReport r = check_graphoid(c91, 5);
  CHECK_FALSE(r.sg2);
  CHECK_FALSE(r.holds());
  REQUIRE(r.sg2_witness);
  // 1⊥5|{2,3} and 1⊥4|{2,3,5} need 1⊥5|{2,3,4}
  CHECK(r.sg2_witness->missing == CiStatement(0, 4, {1, 2, 3}));
  const auto& prem = r.sg2_witness->premises;
  CHECK(std::find(prem.begin(), prem.end(), CiStatement(0, 4, {1, 2})) != prem.end());
  CHECK(std::find(prem.begin(), prem.end(), CiStatement(0, 3, {1, 2, 4})) != prem.end());

  // intersection: 1⊥2|3 and 1⊥3|2 without 1⊥2
  const GraphoidReport ri = check_graphoid(relations("1 _||_ 2 | 3\n1 _||_ 3 | 2\n", 3), 3);
  CHECK_FALSE(ri.intersection);
}
