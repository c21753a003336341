#pragma once

#include <cstdint>
#include <optional>

#include "walkopt/mdp.hpp"
#include "walkopt/walk_times.hpp"

namespace walkopt {

// Minimum expected hitting time to S over all policies, per state, by
// value iteration on the Bellman operator
//   H(i) = 1 + min_a sum_j P(i,a,j) H(j),  H = 0 on S.
// Throws AlgorithmError naming the offending states when S cannot be
// reached almost surely from everywhere.
std::vector<double> min_hitting_time_vi(const Mdp& m, const NodeSet& S,
                                        double tol = 1e-10,
                                        long max_iters = 1000000);

// Greedy policy extracted from a hitting-time value vector.
Policy min_hitting_policy(const Mdp& m, const NodeSet& S,
                          const std::vector<double>& values);

struct AcpcSolution {
  double lambda = 0.0;
  Policy policy;
  long evaluations = 0;  // inner fixed-point sweeps
};

// Optimal average cost per cycle for target set S: the lambda at which
// the optimal gain of the step cost 1 - lambda * P(i,a,S) crosses zero.
// Outer bisection on lambda; inner damped relative value iteration,
// warm-started from `initial_bias` when given (the result must not
// depend on it).
AcpcSolution acpc_optimal(const Mdp& m, const NodeSet& S, double tol = 1e-9,
                          std::vector<double> initial_bias = {});

struct AcpcEvaluation {
  TimeEstimate per_cycle;              // simulated steps per S-visit
  std::optional<double> stationary_exact;  // 1 / pi(S) when chain is ergodic
  long visits = 0;
  bool diverged = false;  // no S-visit within the horizon
};

// Simulation estimate of the ACPC of a fixed policy: horizon steps of the
// induced chain, one cycle completed at each t >= 1 with X_t in S.
AcpcEvaluation acpc_eval(const Mdp& m, const Policy& mu, const NodeSet& S,
                         long horizon, std::uint64_t seed);

}  // namespace walkopt
