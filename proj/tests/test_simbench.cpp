#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "gsp/errors.hpp"
#include "gsp/io.hpp"
#include "gsp/simbench.hpp"
#include "oracles.hpp"

using namespace gsp;

TEST_CASE("random Gaussian DAGs") {
  std::mt19937_64 rng(401);
  const SemModel full = random_gaussian_dag(6, 5.0, rng);
  CHECK(full.dag.arrow_count() == 15);
  double total = 0.0;
  const int draws = 1000;
  for (int k = 0; k < draws; ++k) {
    const SemModel m = random_gaussian_dag(10, 2.0, rng);
    total += m.dag.arrow_count();
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 10; ++j) {
        const double w = m.weights(i, j);
        if (m.dag.has_arrow(i, j)) {
          CHECK(i < j);
          CHECK(std::abs(w) >= 0.25);
          CHECK(std::abs(w) <= 1.0);
        } else {
          CHECK(w == 0.0);
        }
      }
  }
  // 45 pairs with probability 2/9 each
  const double q = 2.0 / 9.0, mean = 45 * q, sd = std::sqrt(45 * q * (1 - q) / draws);
  CHECK(std::abs(total / draws - mean) < 3 * sd);
  CHECK_THROWS_AS(random_gaussian_dag(1, 0.5, rng), InputError);
  CHECK_THROWS_AS(random_gaussian_dag(4, 0.0, rng), InputError);
  CHECK_THROWS_AS(random_gaussian_dag(4, 3.5, rng), InputError);
}

TEST_CASE("SEM covariance") {
  SemModel zero{Dag(3), Eigen::MatrixXd::Zero(3, 3)};
  CHECK(sem_covariance(zero).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  SemModel two{Dag::FromArrows(2, {{0, 1}}), Eigen::MatrixXd::Zero(2, 2)};
  two.weights(0, 1) = 0.5;
  Eigen::MatrixXd expect(2, 2);
  expect << 1, 0.5, 0.5, 1.25;
  CHECK(sem_covariance(two).isApprox(expect, 1e-14));
}

TEST_CASE("sample covariance converges") {
  std::mt19937_64 rng(403);
  const SemModel m = random_gaussian_dag(4, 1.5, rng);
  const Eigen::MatrixXd sigma = sem_covariance(m);
  const long n = 100000;
  const auto st = sem_covariance_and_sample(m, n, rng);
  CHECK(st.sample_count() == n);
  CHECK_FALSE(st.is_exact());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double var = sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j);
      CHECK(std::abs(st.covariance()(i, j) - sigma(i, j)) <= 5 * std::sqrt(var / n));
    }
  const auto ex = sem_covariance_and_sample(m, std::nullopt, rng);
  CHECK(ex.is_exact());
  CHECK(ex.covariance().isApprox(sigma));
}

TEST_CASE("PC baseline") {
  const Dag chain = Dag::FromArrows(3, {{0, 1}, {1, 2}});
  CHECK(pc_baseline(DsepOracle(chain)) == essential_graph(chain));
  const Dag coll = Dag::FromArrows(3, {{0, 1}, {2, 1}});
  const Cpdag c = pc_baseline(DsepOracle(coll));
  CHECK(c.has_directed(0, 1));
  CHECK(c.has_directed(2, 1));
  std::mt19937_64 rng(405);
  for (int trial = 0; trial < 40; ++trial) {
    const Dag g = oracle::random_dag(3 + trial % 5, 0.4, rng);
    CHECK(pc_baseline(DsepOracle(g)) == essential_graph(g));
  }
}

TEST_CASE("moral graph and skeleton counts") {
  const Dag coll = Dag::FromArrows(3, {{0, 1}, {2, 1}});
  const AllowedPairs m = moral_graph(coll);
  CHECK(m[0] == NodeSet{1, 2});
  CHECK(m[1] == NodeSet{0, 2});
  const Cpdag truth = essential_graph(coll);
  const Cpdag est = essential_graph(Dag::FromArrows(3, {{0, 1}, {0, 2}}));
  const SkeletonCounts k = skeleton_counts(truth, est);
  CHECK(k.tp == 1);
  CHECK(k.fp == 1);
  CHECK(k.fn == 1);
}

TEST_CASE("bench grid parsing") {
  const BenchGrid g = parse_bench_grid(R"({
    "schema_version": 1, "master_seed": 7, "replicates": 2,
    "generators": [{"p": [5, 6], "s": 1.0}],
    "algorithms": [{"algo": "triangle-sp", "depth": [1, "inf"], "runs": [1, 5]},
                   {"algo": "pc", "lambda": 0.01}]
  })");
  CHECK(g.generators.size() == 2);
  CHECK(g.algorithms.size() == 5);
  CHECK(g.algorithms[0].depth == 1);
  CHECK_FALSE(g.algorithms[2].depth.has_value());
  CHECK(g.algorithms[4].lambda == 0.01);
  CHECK(g.master_seed == 7);
  CHECK_THROWS_AS(parse_bench_grid("{"), InputError);
  CHECK_THROWS_AS(parse_bench_grid(R"({"generators": [], "algorithms": [{"algo": "pc"}]})"), InputError);
  CHECK_THROWS_AS(parse_bench_grid(R"({"generators": [{"p": 4, "s": 1}], "algorithms": [{"algo": "ges"}]})"),
                  InputError);
  CHECK_THROWS_AS(parse_bench_grid(R"({"schema_version": 2, "generators": [{"p": 4, "s": 1}],
                                       "algorithms": [{"algo": "pc"}]})"),
                  InputError);
  CHECK_THROWS_AS(parse_bench_grid(R"({"generators": [{"p": 4, "s": 1}],
                                       "algorithms": [{"algo": "pc", "lambda": 0.1, "alpha": 0.1}]})"),
                  InputError);
}

TEST_CASE("benchmark records") {
  const BenchGrid g = parse_bench_grid(R"({
    "master_seed": 11, "replicates": 3,
    "generators": [{"p": 5, "s": 1.5}, {"p": 5, "s": 1.5, "n": 2000}],
    "algorithms": [{"algo": "triangle-sp", "depth": 4, "runs": 2},
                   {"algo": "edge-sp"}, {"algo": "sp"}, {"algo": "pc", "alpha": 0.01},
                   {"algo": "highdim-sp", "lambda": 0.001, "moral": true},
                   {"algo": "bic-sp"}, {"algo": "mindeg", "lambda": 0.001}]
  })");
  const auto recs = run_benchmark(g, 3);
  CHECK(recs.size() == 2 * 7 * 3);
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const TrialRecord& r = recs[k];
    CHECK(r.trial == static_cast<long>(k));
    CHECK(r.skeleton.tp + r.skeleton.fn >= 0);
    if (r.status != "ok") continue;
    // the skeleton of the truth splits into hits and misses
    std::mt19937_64 rng(r.seed);
    const SemModel m = random_gaussian_dag(r.gen.p, r.gen.s, rng);
    CHECK(r.true_arrows == m.dag.arrow_count());
    CHECK(r.skeleton.tp + r.skeleton.fn == m.dag.arrow_count());
    CHECK(r.exact == (r.shd == 0));
  }
  // exact-oracle cells of consistent algorithms recover the truth
  for (const TrialRecord& r : recs) {
    if (r.gen.n == 0 && (r.alg.algo == "edge-sp" || r.alg.algo == "sp")) {
      CHECK(r.status == "ok");
      CHECK(r.exact);
    }
    // Fisher z needs samples; bic-sp needs samples
    if (r.gen.n == 0 && (r.alg.algo == "pc" || r.alg.algo == "bic-sp")) CHECK(r.status == "error");
    if (r.gen.n > 0 && r.alg.algo == "edge-sp") CHECK(r.status == "error");
  }
  // the same data seed is shared across algorithms
  CHECK(recs[0].seed == recs[3].seed);
  CHECK(trial_data_seed(11, 0, 0) != trial_data_seed(11, 0, 1));

  const std::string csv = trials_csv(recs);
  CHECK(csv.rfind("schema_version,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(recs.size()) + 1);
  const auto agg = nlohmann::json::parse(aggregates_json(g, recs));
  CHECK(agg["schema_version"] == 1);
  CHECK(agg["cells"].size() == 14);

  const auto dir = std::filesystem::temp_directory_path() / "gsp_bench_test";
  std::filesystem::remove_all(dir);
  write_benchmark(dir, g, recs);
  for (const char* f : {"trials.csv", "timings.csv", "aggregates.json"}) CHECK(std::filesystem::exists(dir / f));
  std::filesystem::remove_all(dir);
}

TEST_CASE("benchmark timeouts are recorded") {
  const BenchGrid g = parse_bench_grid(R"({
    "timeout_seconds": 1e-9, "generators": [{"p": 8, "s": 3}],
    "algorithms": [{"algo": "triangle-sp", "depth": "inf"}]
  })");
  const auto recs = run_benchmark(g, 1);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].status == "timeout");
}

TEST_CASE("worker count from the environment") {
  setenv("GSP_WORKERS", "3", 1);
  CHECK(default_workers() == 3);
  unsetenv("GSP_WORKERS");
  CHECK(default_workers() >= 1);
}
