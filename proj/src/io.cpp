#include "gsp/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gsp/errors.hpp"

namespace gsp::io {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw InputError("line " + std::to_string(line) + ": " + msg);
}

int parse_int(const std::string& tok, int line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "expected an integer, got '" + tok + "'");
  return v;
}

// A logical line: number and content with comments stripped. The node pragma
// is reported separately.
struct Lines {
  std::vector<std::pair<int, std::string>> body;
  std::optional<int> pragma_nodes;
};

Lines read_lines(std::istream& in) {
  Lines out;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string rest = trim(std::string_view(line).substr(1));
      if (rest.rfind("nodes:", 0) == 0) out.pragma_nodes = parse_int(trim(std::string_view(rest).substr(6)), number);
      continue;
    }
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = trim(std::string_view(line).substr(0, hash));
    out.body.emplace_back(number, line);
  }
  return out;
}

int resolve_nodes(std::optional<int> given, std::optional<int> pragma, int max_seen, int line) {
  if (given && pragma && *given != *pragma) {
    fail(line, "node count " + std::to_string(*pragma) + " in file disagrees with " + std::to_string(*given));
  }
  const int p = given ? *given : (pragma ? *pragma : max_seen);
  if (p < 1) throw InputError("empty graph file without a '# nodes:' line");
  if (max_seen > p) throw InputError("node " + std::to_string(max_seen) + " exceeds node count " + std::to_string(p));
  return p;
}

struct EdgeLine {
  int a;
  int b;
  bool directed;
  int line;
};

std::vector<EdgeLine> parse_edges(const Lines& lines, bool allow_undirected, int* max_seen) {
  std::vector<EdgeLine> edges;
  for (const auto& [number, text] : lines.body) {
    const auto tok = split_ws(text);
    if (tok.size() != 3 || (tok[1] != "->" && tok[1] != "--")) fail(number, "expected 'i -> j'");
    if (tok[1] == "--" && !allow_undirected) fail(number, "undirected edge in a DAG file");
    const int a = parse_int(tok[0], number);
    const int b = parse_int(tok[2], number);
    if (a < 1 || b < 1) fail(number, "node indices are 1-based");
    if (a == b) fail(number, "self-loop");
    *max_seen = std::max({*max_seen, a, b});
    edges.push_back({a, b, tok[1] == "->", number});
  }
  return edges;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string format_permutation(const Permutation& perm) {
  std::string out;
  const bool digits = perm.size() <= 9;
  for (int k = 0; k < perm.size(); ++k) {
    if (!digits && k > 0) out += ',';
    out += std::to_string(perm.at(k) + 1);
  }
  return out;
}

Permutation parse_permutation(const std::string& text, int num_nodes) {
  const std::string t = trim(text);
  std::vector<Node> order;
  if (t.find(',') != std::string::npos) {
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) order.push_back(parse_int(trim(tok), 1) - 1);
  } else {
    if (num_nodes > 9) throw InputError("permutations of more than 9 nodes must be comma-separated");
    for (char ch : t) {
      if (ch < '1' || ch > '9') throw InputError("invalid permutation '" + t + "'");
      order.push_back(ch - '1');
    }
  }
  if (static_cast<int>(order.size()) != num_nodes) {
    throw InputError("permutation '" + t + "' has " + std::to_string(order.size()) + " entries, expected " +
                     std::to_string(num_nodes));
  }
  return Permutation(std::move(order));
}

std::string format_dag(const Dag& g) {
  std::string out = "# nodes: " + std::to_string(g.num_nodes()) + "\n";
  for (const Arrow& a : g.arrows()) out += std::to_string(a.from + 1) + " -> " + std::to_string(a.to + 1) + "\n";
  return out;
}

Dag parse_dag(std::istream& in, std::optional<int> num_nodes) {
  const Lines lines = read_lines(in);
  int max_seen = 0;
  const auto edges = parse_edges(lines, false, &max_seen);
  const int p = resolve_nodes(num_nodes, lines.pragma_nodes, max_seen, 0);
  Dag g(p);
  for (const EdgeLine& e : edges) {
    try {
      g.add_arrow(e.a - 1, e.b - 1);
    } catch (const InputError& err) {
      fail(e.line, err.what());
    }
  }
  return g;
}

Dag read_dag(const std::filesystem::path& path, std::optional<int> num_nodes) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_dag(in, num_nodes);
}

std::string format_cpdag(const Cpdag& g) {
  std::string out = "# nodes: " + std::to_string(g.num_nodes()) + "\n";
  for (const Arrow& a : g.directed_edges()) out += std::to_string(a.from + 1) + " -> " + std::to_string(a.to + 1) + "\n";
  for (const auto& [a, b] : g.undirected_edges()) out += std::to_string(a + 1) + " -- " + std::to_string(b + 1) + "\n";
  return out;
}

Cpdag parse_cpdag(std::istream& in, std::optional<int> num_nodes) {
  const Lines lines = read_lines(in);
  int max_seen = 0;
  const auto edges = parse_edges(lines, true, &max_seen);
  const int p = resolve_nodes(num_nodes, lines.pragma_nodes, max_seen, 0);
  Cpdag g(p);
  for (const EdgeLine& e : edges) {
    if (g.adjacent(e.a - 1, e.b - 1)) fail(e.line, "duplicate edge");
    if (e.directed) {
      g.add_directed(e.a - 1, e.b - 1);
    } else {
      g.add_undirected(e.a - 1, e.b - 1);
    }
  }
  return g;
}

std::string format_ci_set(const CiSet& c) {
  std::string out = "# nodes: " + std::to_string(c.num_nodes()) + "\n";
  for (const CiStatement& st : c.statements()) {
    out += std::to_string(st.i + 1) + " _||_ " + std::to_string(st.j + 1) + " |";
    st.s.for_each([&](Node v) { out += " " + std::to_string(v + 1); });
    out += "\n";
  }
  return out;
}

CiSet parse_ci_set(std::istream& in, std::optional<int> num_nodes) {
  const Lines lines = read_lines(in);
  struct Raw {
    int i;
    int j;
    std::vector<int> s;
    int line;
  };
  std::vector<Raw> raw;
  int max_seen = 0;
  for (const auto& [number, text] : lines.body) {
    const auto tok = split_ws(text);
    if (tok.size() < 4 || tok[1] != "_||_" || tok[3] != "|") fail(number, "expected 'i _||_ j | s1 s2 ...'");
    Raw r{parse_int(tok[0], number), parse_int(tok[2], number), {}, number};
    for (std::size_t k = 4; k < tok.size(); ++k) r.s.push_back(parse_int(tok[k], number));
    for (int v : r.s) max_seen = std::max(max_seen, v);
    max_seen = std::max({max_seen, r.i, r.j});
    if (r.i < 1 || r.j < 1 || std::any_of(r.s.begin(), r.s.end(), [](int v) { return v < 1; })) {
      fail(number, "node indices are 1-based");
    }
    raw.push_back(std::move(r));
  }
  int p = 0;
  if (num_nodes || lines.pragma_nodes) {
    p = resolve_nodes(num_nodes, lines.pragma_nodes, max_seen, 0);
  } else {
    if (max_seen == 0) throw InputError("empty relations file needs '# nodes:' or an explicit node count");
    p = max_seen;
  }
  CiSet c(p);
  for (const Raw& r : raw) {
    NodeSet s;
    for (int v : r.s) s.insert(v - 1);
    try {
      c.insert(CiStatement(r.i - 1, r.j - 1, s));
    } catch (const InputError& err) {
      fail(r.line, err.what());
    }
  }
  return c;
}

CiSet read_ci_set(const std::filesystem::path& path, std::optional<int> num_nodes) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_ci_set(in, num_nodes);
}

Eigen::MatrixXd parse_csv_matrix(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const std::string t = trim(cell);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && number == 1) continue;  // header
      fail(number, "non-numeric CSV cell");
    }
    if (!rows.empty() && row.size() != rows.front().size()) fail(number, "ragged CSV row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("CSV file has no data rows");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

Eigen::MatrixXd read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_csv_matrix(in);
}

std::string format_csv_matrix(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  if (!header.empty()) out += "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? "," : "") + fmt_double(m(r, c));
    out += "\n";
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
}

}  // namespace gsp::io
