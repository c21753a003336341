#pragma once

#include "walkopt/acpc.hpp"
#include "walkopt/mdp.hpp"

namespace walkopt {

// Joint reachability + ACPC instance: the MDP, its unsafe set, the
// accepting maximal end components, and the selection budget.
struct JointInstance {
  Mdp mdp;
  NodeSet R;
  std::vector<EndComponent> amecs;
  int k = 0;

  static JointInstance build(Mdp m, NodeSet R, int k);
};

struct JointMatroidResult {
  Matroid matroid;
  bool budget_covers_amecs = true;
  std::string warning;
};

// Union of the one-per-AMEC partition matroid and the rank (k - N)
// uniform matroid. A budget below the AMEC count is flagged: no basis
// can then intersect every AMEC.
JointMatroidResult joint_matroid(const std::vector<EndComponent>& amecs, int k);

// Bisection on lambda with one greedy cover per AMEC (each restricted to
// its own sub-MDP); feasible when the union of covers fits the budget.
// The certificate is the worst per-AMEC exact ACPC of the chosen states.
AcpcSelection min_acpc_max_reach(const JointInstance& inst, double delta,
                                 const AcpcSelectConfig& cfg = {});

// MDP with every AMEC collapsed to one absorbing goal state l_m.
// Remaining states keep their original relative order and come first;
// l_m sits at index first_goal + m.
struct AugmentedMdp {
  Mdp mdp;
  std::vector<int> old_to_new;  // -1 for states inside an AMEC
  int first_goal = 0;
  int num_goals = 0;

  NodeSet goal_states() const;
  NodeSet map_set(const NodeSet& parent_set) const;  // keep-states only
};
AugmentedMdp augmented_mdp(const Mdp& m, const std::vector<EndComponent>& amecs);

struct TwoStageResult {
  std::vector<NodeSet> per_amec_sets;  // parent-indexed S_m
  std::vector<int> costs;              // c_m = |S_m|
  std::vector<int> chosen_amecs;       // T, in pick order
  NodeSet final_set;                   // union of chosen S_m
  double stage2_bound = 0.0;           // 1 + log(1 / r(T before last pick))
};

// Two-stage heuristic: per-AMEC minimum covers at the given lambda, then
// the cost-ratio greedy over AMECs on the z-system volume until the
// margin LP certifies emptiness.
TwoStageResult two_stage_select(const JointInstance& inst, double lambda,
                                const AcpcSelectConfig& cfg = {});

}  // namespace walkopt
