#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsp/ci.hpp"
#include "gsp/graph.hpp"

// Text formats. Nodes are 1-based on disk; blank lines and '#' comments are
// ignored except for an optional "# nodes: P" line that fixes the node count.
// All parse errors throw InputError with the offending line number.
namespace gsp::io {

// Digit string for p <= 9 ("1423"), comma-separated otherwise ("1,4,2,3").
std::string format_permutation(const Permutation& perm);
// Accepts either form for any p; the node count must match.
Permutation parse_permutation(const std::string& text, int num_nodes);

std::string format_dag(const Dag& g);
Dag parse_dag(std::istream& in, std::optional<int> num_nodes = std::nullopt);
Dag read_dag(const std::filesystem::path& path, std::optional<int> num_nodes = std::nullopt);

// Directed edges as "i -> j", undirected as "i -- j" with i < j.
std::string format_cpdag(const Cpdag& g);
Cpdag parse_cpdag(std::istream& in, std::optional<int> num_nodes = std::nullopt);

// "i _||_ j | s1 s2"; the empty set is written "i _||_ j |".
std::string format_ci_set(const CiSet& c);
CiSet parse_ci_set(std::istream& in, std::optional<int> num_nodes = std::nullopt);
CiSet read_ci_set(const std::filesystem::path& path, std::optional<int> num_nodes = std::nullopt);

// Row-major numeric CSV. A first row that does not parse as numbers is
// treated as a header and skipped.
Eigen::MatrixXd parse_csv_matrix(std::istream& in);
Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path);
// Values are printed with enough digits to round-trip.
std::string format_csv_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& header = {});

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace gsp::io
