#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gsp/ci.hpp"
#include "gsp/graph.hpp"
#include "gsp/imap.hpp"

namespace gsp {

// Linear Gaussian SEM X = AᵀX + ε with ε ~ N(0, I). weights(i, j) is the
// coefficient of arrow i -> j and is zero off the arrows.
struct SemModel {
  Dag dag;
  Eigen::MatrixXd weights;
};

// Erdős–Rényi DAG on the natural order: arrow i -> j (i < j) with probability
// s / (p - 1), weight uniform on [-1, -0.25] ∪ [0.25, 1].
// Throws InputError unless p >= 2 and 0 < s <= p - 1.
SemModel random_gaussian_dag(int p, double s, std::mt19937_64& rng);

// Σ = (I - Aᵀ)⁻¹ (I - A)⁻¹.
Eigen::MatrixXd sem_covariance(const SemModel& m);

// n i.i.d. rows by forward simulation in topological order.
Eigen::MatrixXd sem_sample(const SemModel& m, long n, std::mt19937_64& rng);

// Exact statistics when n is empty, sample statistics otherwise.
GaussianSuffStats sem_covariance_and_sample(const SemModel& m, std::optional<long> n, std::mt19937_64& rng);

// PC with the order-independent skeleton phase: conditioning sets come from
// the adjacencies frozen at the start of each level. Colliders i -> k <- j are
// oriented when k is outside the recorded separating set, then Meek's rules
// close the graph.
Cpdag pc_baseline(const CiOracle& oracle);

// Undirected moral graph of g as a candidate-arrow restriction.
AllowedPairs moral_graph(const Dag& g);

struct SkeletonCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
};
SkeletonCounts skeleton_counts(const Cpdag& truth, const Cpdag& estimate);

// ---- benchmark harness --------------------------------------------------

struct GeneratorCell {
  int p = 0;
  double s = 0.0;
  long n = 0;  // 0: exact covariance
};

struct AlgorithmCell {
  std::string algo;  // triangle-sp, edge-sp, highdim-sp, sp, pc, bic-sp, mindeg
  std::optional<int> depth;
  int runs = 1;
  std::string start = "random";
  // Exactly one of these is set for CI-based algorithms; neither means the
  // d-separation oracle of the true DAG (exact cells only).
  std::optional<double> lambda;
  std::optional<double> alpha;
  bool moral = false;
};

struct BenchGrid {
  int schema_version = 1;
  std::uint64_t master_seed = 0;
  int replicates = 1;
  double timeout_seconds = 600.0;
  std::vector<GeneratorCell> generators;
  std::vector<AlgorithmCell> algorithms;
};

// Parses the grid JSON. List-valued fields expand to the Cartesian product of
// their values. Throws InputError on malformed or unsupported grids.
BenchGrid parse_bench_grid(const std::string& json_text);

struct TrialRecord {
  long trial = 0;
  int generator = 0;
  int algorithm = 0;
  int replicate = 0;
  std::uint64_t seed = 0;
  GeneratorCell gen;
  AlgorithmCell alg;
  std::string status = "ok";  // ok, timeout or error
  std::string message;
  int true_arrows = 0;
  int arrows = 0;
  int shd = 0;
  bool exact = false;
  SkeletonCounts skeleton;
  std::string cpdag;  // compact edge list, e.g. "1->2;2--3"
  double wall_ms = 0.0;
};

// Seed of the data for (generator cell, replicate); shared across algorithms.
std::uint64_t trial_data_seed(std::uint64_t master, int generator, int replicate);

// Runs one trial; failures are recorded in the status, never thrown.
TrialRecord run_trial(const BenchGrid& grid, int generator, int algorithm, int replicate, long trial_index);

// Runs every (generator, algorithm, replicate) on a pool of `workers` threads
// and returns the records sorted by trial index.
std::vector<TrialRecord> run_benchmark(const BenchGrid& grid, int workers);

// Worker count from GSP_WORKERS, else the hardware concurrency (at least 1).
int default_workers();

std::string trials_csv(const std::vector<TrialRecord>& records);
std::string timings_csv(const std::vector<TrialRecord>& records);
std::string aggregates_json(const BenchGrid& grid, const std::vector<TrialRecord>& records);

// Writes trials.csv, timings.csv and aggregates.json into `dir`.
void write_benchmark(const std::filesystem::path& dir, const BenchGrid& grid, const std::vector<TrialRecord>& records);

}  // namespace gsp
