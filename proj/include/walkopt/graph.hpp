#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "walkopt/common.hpp"

namespace walkopt {

// Row-stochastic transition structure of a Markov chain on n nodes.
// Immutable after construction; entries validated to lie in [0,1] with
//every row summing to 1 within 1e-12.
class StochasticGraph {
 public:
  StochasticGraph(int n, std::vector<double> row_major);
  static StochasticGraph from_rows(const std::vector<std::vector<double>>& rows);

  int n() const { return n_; }
  double at(Node i, Node j) const {
    return p_[static_cast<size_t>(i) * static_cast<size_t>(n_) +
               static_cast<size_t>(j)];
  }
  std::span<const double> row(Node i) const {
    return {p_.data() + static_cast<size_t>(i) * static_cast<size_t>(n_),
            static_cast<size_t>(n_)};
  }

 private:
  int n_;
  std::vector<double> p_;
};

struct SamplePath {
  std::vector<Node> states;
  std::uint64_t seed = 0;
};

// Walk of `horizon` steps from `start`; the returned path has horizon+1
// states. Identical seeds give bit-identical paths.
SamplePath simulate_path(const StochasticGraph& g, Node start, long horizon,
                         std::uint64_t seed);

// Limiting distribution of an ergodic chain by power iteration, to
// sup-norm residual `tol`. Non-convergence within `max_iters` signals a
// non-ergodic chain and raises AlgorithmError.
Distribution stationary_distribution(const StochasticGraph& g,
                                     double tol = 1e-12,
                                     long max_iters = 1000000);

// Directed G(n,p); rows normalized uniformly over out-neighbors, nodes
// with no out-edge get a self-loop before normalization. Connectivity is
// not forced; experiment outputs report it instead.
StochasticGraph gen_erdos_renyi(int n, double p, std::uint64_t seed);

bool strongly_connected(const StochasticGraph& g);

// CSV round trip. Accepted formats: a dense n x n matrix (one row per
// line), or an edge list with header "i,j,weight". Rows are normalized
// on load.
StochasticGraph load_graph_csv(const std::string& path);
void save_graph_csv(const StochasticGraph& g, const std::string& path);

}  // namespace walkopt
