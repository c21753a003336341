#include "walkopt/graph.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace walkopt {

namespace {

void check_stochastic(int n, const std::vector<double>& p) {
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      double v = p[static_cast<size_t>(i) * n + j];
      if (v < 0.0 || v > 1.0 + 1e-12)
        throw ValidationError("transition entry (" + std::to_string(i) + "," +
                              std::to_string(j) + ") outside [0,1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("row " + std::to_string(i) + " sums to " +
                            std::to_string(sum));
  }
}

}  // namespace

StochasticGraph::StochasticGraph(int n, std::vector<double> row_major)
    : n_(n), p_(std::move(row_major)) {
  if (n_ <= 0) throw ValidationError("StochasticGraph: n must be positive");
  if (p_.size() != static_cast<size_t>(n_) * static_cast<size_t>(n_))
    throw ValidationError("StochasticGraph: matrix size mismatch");
  check_stochastic(n_, p_);
}

StochasticGraph StochasticGraph::from_rows(
    const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<double> p;
  p.reserve(static_cast<size_t>(n) * n);
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n)
      throw ValidationError("StochasticGraph: ragged rows");
    p.insert(p.end(), r.begin(), r.end());
  }
  return StochasticGraph(n, std::move(p));
}

SamplePath simulate_path(const StochasticGraph& g, Node start, long horizon,
                         std::uint64_t seed) {
  if (start < 0 || start >= g.n())
    throw ValidationError("simulate_path: start node out of range");
  if (horizon < 1) throw ValidationError("simulate_path: horizon must be >= 1");
  Rng rng(seed);
  SamplePath path;
  path.seed = seed;
  path.states.reserve(static_cast<size_t>(horizon) + 1);
  path.states.push_back(start);
  Node cur = start;
  for (long t = 0; t < horizon; ++t) {
    const double u = rng.uniform();
    double acc = 0.0;
    Node next = g.n() - 1;  // fallback absorbs rounding at the top end
    auto row = g.row(cur);
    for (Node j = 0; j < g.n(); ++j) {
      acc += row[static_cast<size_t>(j)];
      if (u < acc) {
        next = j;
        break;
      }
    }
    path.states.push_back(next);
    cur = next;
  }
  return path;
}

Distribution stationary_distribution(const StochasticGraph& g, double tol,
                                     long max_iters) {
  if (tol <= 0) throw ValidationError("stationary_distribution: tol <= 0");
  const int n = g.n();
  // Deliberately asymmetric start: a uniform start can sit exactly on a
  // periodic chain's invariant vector and mask non-ergodicity.
  std::vector<double> phi(static_cast<size_t>(n));
  {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      phi[static_cast<size_t>(i)] = static_cast<double>(i + 1);
      sum += phi[static_cast<size_t>(i)];
    }
    for (auto& x : phi) x /= sum;
  }
  std::vector<double> next(static_cast<size_t>(n));
  for (long it = 0; it < max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      auto row = g.row(i);
      const double w = phi[static_cast<size_t>(i)];
      if (w == 0.0) continue;
      for (int j = 0; j < n; ++j)
        next[static_cast<size_t>(j)] += w * row[static_cast<size_t>(j)];
    }
    double diff = 0.0;
    for (int j = 0; j < n; ++j)
      diff = std::max(diff, std::abs(next[static_cast<size_t>(j)] -
                                     phi[static_cast<size_t>(j)]));
    if (diff <= tol) {
      // phi is the iterate whose residual was just measured; return it
      // renormalized against accumulated rounding.
      double sum = 0.0;
      for (double x : phi) sum += x;
      for (auto& x : phi) x /= sum;
      return Distribution(phi);
    }
    phi.swap(next);
  }
  throw AlgorithmError(
      "stationary_distribution: no convergence; chain is likely not ergodic");
}

StochasticGraph gen_erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 2) throw ValidationError("gen_erdos_renyi: n must be >= 2");
  if (p <= 0.0 || p > 1.0)
    throw ValidationError("gen_erdos_renyi: p must be in (0,1]");
  Rng rng(seed);
  std::vector<double> mat(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    int out_degree = 0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (rng.uniform() < p) {
        mat[static_cast<size_t>(i) * n + j] = 1.0;
        ++out_degree;
      }
    }
    if (out_degree == 0) {
      mat[static_cast<size_t>(i) * n + i] = 1.0;  // isolated-row repair
      out_degree = 1;
    }
    for (int j = 0; j < n; ++j)
      mat[static_cast<size_t>(i) * n + j] /= out_degree;
  }
  return StochasticGraph(n, std::move(mat));
}

bool strongly_connected(const StochasticGraph& g) {
  // Forward reachability from node 0, then on the transpose.
  const auto sweep = [&](bool transpose) {
    std::vector<char> seen(static_cast<size_t>(g.n()), 0);
    std::vector<Node> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const Node u = stack.back();
      stack.pop_back();
      for (Node j = 0; j < g.n(); ++j) {
        const double p = transpose ? g.at(j, u) : g.at(u, j);
        if (p > 0.0 && !seen[static_cast<size_t>(j)]) {
          seen[static_cast<size_t>(j)] = 1;
          ++count;
          stack.push_back(j);
        }
      }
    }
    return count == g.n();
  };
  return sweep(false) && sweep(true);
}

StochasticGraph load_graph_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open graph file: " + path);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) {
    // strip trailing CR and skip blanks
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw ValidationError("empty graph file: " + path);

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };

  std::vector<std::vector<double>> rows;
  if (lines[0].rfind("i,j", 0) == 0) {
    // Edge list with header.
    struct Edge {
      int i, j;
      double w;
    };
    std::vector<Edge> edges;
    int n = 0;
    for (size_t k = 1; k < lines.size(); ++k) {
      auto f = split(lines[k]);
      if (f.size() != 3)
        throw ValidationError("edge list line has " +
                              std::to_string(f.size()) + " fields: " +
                              lines[k]);
      Edge e{std::stoi(f[0]), std::stoi(f[1]), std::stod(f[2])};
      if (e.i < 0 || e.j < 0 || e.w < 0)
        throw ValidationError("edge list entry malformed: " + lines[k]);
      n = std::max(n, std::max(e.i, e.j) + 1);
      edges.push_back(e);
    }
    rows.assign(static_cast<size_t>(n),
                std::vector<double>(static_cast<size_t>(n), 0.0));
    for (const auto& e : edges)
      rows[static_cast<size_t>(e.i)][static_cast<size_t>(e.j)] += e.w;
  } else {
    for (const auto& l : lines) {
      auto f = split(l);
      std::vector<double> r;
      r.reserve(f.size());
      for (const auto& tok : f) r.push_back(std::stod(tok));
      rows.push_back(std::move(r));
    }
    if (rows.size() != rows[0].size())
      throw ValidationError("graph matrix is not square");
  }
  // Normalize rows; a row with no mass gets a self-loop.
  const int n = static_cast<int>(rows.size());
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double v : rows[static_cast<size_t>(i)]) sum += v;
    if (sum <= 0.0) {
      rows[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
      sum = 1.0;
    }
    for (auto& v : rows[static_cast<size_t>(i)]) v /= sum;
  }
  return StochasticGraph::from_rows(rows);
}

void save_graph_csv(const StochasticGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write graph file: " + path);
  out.precision(17);
  for (int i = 0; i < g.n(); ++i) {
    for (int j = 0; j < g.n(); ++j) {
      if (j) out << ",";
      out << g.at(i, j);
    }
    out << "\n";
  }
}

}  // namespace walkopt
