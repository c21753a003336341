#pragma once

#include <optional>

#include "walkopt/lp.hpp"
#include "walkopt/mdp.hpp"
#include "walkopt/submodular.hpp"

namespace walkopt {

// Solution of the maximum-reachability linear program: per-state
// probability of reaching S while avoiding R, its sum, and a policy
// whose chosen action binds the Bellman inequality.
struct ReachValue {
  std::vector<double> x;
  double objective = 0.0;
  Policy policy;
};

// max over policies of Pr(reach S, avoid R), all start states at once.
ReachValue max_reach_exact(const Mdp& m, const NodeSet& S, const NodeSet& R);

// Penalized objective 1.x + rho * sum_{i in S} (1 - x_i).
double relaxed_objective(const std::vector<double>& x, const NodeSet& S,
                         double rho);

// The penalized LP: same feasible region without the x_i = 1 pins on S.
// For rho > n its optimum matches max_reach_exact.
LpResult solve_relaxed_lp(const Mdp& m, const NodeSet& S, const NodeSet& R,
                          double rho);

// k largest entries of x (ties to the lowest index), or the greedy
// matroid basis maximizing the selected mass. `exclude` masks candidates
// (unsafe states).
NodeSet s_max(const std::vector<double>& x, int k,
              const NodeSet& exclude = {});
NodeSet s_max(const std::vector<double>& x, const Matroid& constraint,
              const NodeSet& exclude = {});

struct PenaltyConfig {
  double rho = 0.0;  // 0 = auto n+1; must exceed n when set explicitly
  double epsilon = 1e-6;
  double delta = 1e-3;
  double barrier_weight = 1.0;
  long max_iters = 100000;
};

struct ReachSelection {
  NodeSet chosen;
  double achieved = 0.0;     // certified objective of the chosen set
  double upper_bound = 0.0;  // min-max bound at a feasible point
  bool converged = false;
  long iterations = 0;
  ReachValue certificate;
};

// Barrier-subgradient selection of S: iterate x <- x + delta (v + w)
// with v the subgradient step (1 - rho on the current S_max, 1 off it)
// and w the scaled log-barrier gradient of the relaxed feasible region,
// until the iterate settles or the cap is hit; the returned set is the
// S_max of the best iterate and is always re-certified exactly.
ReachSelection select_states_reachability(const Mdp& m, const NodeSet& R,
                                          int k, const PenaltyConfig& cfg);
ReachSelection select_states_reachability(const Mdp& m, const NodeSet& R,
                                          const Matroid& constraint,
                                          const PenaltyConfig& cfg);

}  // namespace walkopt
