#pragma once

#include <cstdint>

#include "walkopt/mdp_solvers.hpp"
#include "walkopt/submodular.hpp"

namespace walkopt {

// System A h <= b intersected with the box |h|_inf <= box.
struct HalfspacePolytope {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  double box = 0.0;
  int dim() const { return A.empty() ? 0 : static_cast<int>(A[0].size()); }
};

// Rows indexed by (i, a): (e_i - P(i,a,.)) h <= 1 - lambda 1{i in S}.
// A point of the polytope witnesses that the ACPC bound lambda cannot
// be certified for S.
HalfspacePolytope build_acpc_polytope(const Mdp& m, const NodeSet& S,
                                      double lambda, double zeta);

// Largest t with A h + t 1 <= b inside the box; t <= tol means the
// feasible set has no interior, the deterministic stand-in for a zero
// volume.
double polytope_margin(const HalfspacePolytope& p);
bool polytope_empty_interior(const HalfspacePolytope& p, double tol = 1e-7);

// Monte-Carlo volume: (box volume) x fraction of uniform box samples
// inside the halfspace system. Deterministic given the seed.
Estimate volume_estimate(const HalfspacePolytope& p, long n_samples,
                         std::uint64_t seed);

// vol(P(lambda, S)) estimated on a sample set shared across S, making
// the map S -> value a deterministic set function.
double r_lambda(const Mdp& m, const NodeSet& S, double lambda, double zeta,
                long n_samples, std::uint64_t seed);

// Pre-drawn sample set for repeated r_lambda queries within one greedy
// run. Each sample keeps its base feasibility (the S-independent rows)
// and the states whose selection would cut it.
class RLambdaSampler {
 public:
  RLambdaSampler(const Mdp& m, double lambda, double zeta, long n_samples,
                 std::uint64_t seed);
  double value(const NodeSet& S) const;  // scaled volume estimate
  long base_count() const { return base_count_; }
  long samples() const { return n_; }

 private:
  long n_;
  long base_count_ = 0;
  double cell_;  // box volume / samples
  std::vector<std::vector<char>> blocked_;  // per base sample, per state
};

struct AcpcSelectConfig {
  long n_samples = 2000;
  std::uint64_t seed = 1;
  double lp_tol = 1e-7;
  double oracle_tol = 1e-8;
  int confirmations = 3;
  double theta = 1e6;  // weight enforcing v = 0 on S in the chi system
};

struct AcpcSelection {
  NodeSet chosen;
  double lambda_hat = 0.0;
  double certificate = 0.0;  // oracle ACPC of the chosen set
  GreedyReport greedy_report;
};

struct AcpcCover {
  bool covered = false;  // false: no set of any size certifies this lambda
  GreedyReport report;
};

// One inner pass of the selection loop: grow S greedily on the sampled
// volume until the margin LP certifies emptiness at this lambda.
AcpcCover acpc_greedy_cover(const Mdp& m, double lambda, double zeta,
                            const AcpcSelectConfig& cfg = {});

// Bisection on lambda with an inner greedy cover of r_lambda, emptiness
// decided by the margin LP; the certificate re-solves the chosen set
// with the exact ACPC oracle.
AcpcSelection min_acpc_select(const Mdp& m, int k, double delta, double zeta,
                              const AcpcSelectConfig& cfg = {});

// 1 iff v_i (1 + theta 1{i in S}) <= 1 + sum_j P(i,a,j) v_j for all i, a:
// the merged feasibility test of the optimal-hitting-time system.
int chi_indicator(const std::vector<double>& v, const NodeSet& S, const Mdp& m,
                  double theta);

// Monte-Carlo estimate of the mass of {v in [0, v_max]^n : 1.v >=
// zeta_level, chi_v(S) = 1}; samples shared across S.
double chi_integral(const Mdp& m, const NodeSet& S, double zeta_level,
                    double v_max, long n_samples, std::uint64_t seed,
                    double theta = 1e6);

struct HittingSelection {
  NodeSet chosen;
  double zeta_hat = 0.0;
  double certificate = 0.0;  // sum of optimal hitting times of chosen
  GreedyReport greedy_report;
};

// The modified bisection-greedy: chi(., zeta) replaces r_lambda and zeta
// replaces lambda; certified with the min-hitting-time oracle.
HittingSelection min_hitting_select(const Mdp& m, int k, double delta,
                                    const AcpcSelectConfig& cfg = {});

}  // namespace walkopt
