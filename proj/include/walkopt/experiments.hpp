#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "walkopt/acpc.hpp"
#include "walkopt/graph.hpp"
#include "walkopt/walk_times.hpp"

namespace walkopt {

// Uniform k-subset of the ground set; deterministic per seed.
NodeSet baseline_random(const NodeSet& ground, int k, std::uint64_t seed);

// Top-k nodes by out-degree (positive off-diagonal entries), ties by
// in-degree, then index.
NodeSet baseline_centrality(const StochasticGraph& g, int k);

// k lattice cells nearest the geometric grid center, ties by index.
NodeSet baseline_centrality_lattice(int rows, int cols, int k);

// Cover-time objective over a fixed common path set; per-path times are
// exact integers, capped at the simulation horizon.
class CoverObjective {
 public:
  CoverObjective(const StochasticGraph& g, Node start, long n_paths, long cap,
                 std::uint64_t seed);
  double value(const NodeSet& S) const;  // mean capped cover time
  long paths() const { return static_cast<long>(first_visit_.size()); }
  long cap() const { return cap_; }

 private:
  long cap_;
  std::vector<std::vector<long>> first_visit_;  // per path, per node
};

// Sequential greedy minimization of the cover objective at budget k.
NodeSet cover_greedy_select(const CoverObjective& obj, const NodeSet& ground,
                            int k);
// Greedy result polished by single-swap exchanges to a local optimum of
// the same sampled objective.
NodeSet cover_exchange_select(const CoverObjective& obj, const NodeSet& ground,
                              int k, int max_passes = 8);

struct ExperimentConfig {
  std::string id;  // acpc-budget | acpc-lattice | cover-min
  std::vector<std::uint64_t> seeds;
  int n = 10;
  int rows = 5, cols = 5;
  double p = 0.3, p_c = 0.7;
  std::vector<int> budgets;
  std::vector<double> lambdas;
  long samples = 1000;
  long paths = 200;
  long cap = 100000;
  double delta = 0.25;
  std::string out;

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

struct CsvTable {
  std::vector<std::string> header;  // comment lines, schema-versioned
  std::string columns;
  std::vector<std::string> rows;
};

void write_csv(const CsvTable& table, const std::string& path);

// One row per (seed, parameter, method); per-row failures are recorded
// in the value column and the run continues. A trailing summary block
// reports per-method means.
CsvTable run_experiment(const ExperimentConfig& cfg);

}  // namespace walkopt
