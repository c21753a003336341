#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "walkopt/common.hpp"
#include "walkopt/graph.hpp"

namespace walkopt {

// Finite MDP: states 0..n-1, a dense list of actions per state, and a
// transition distribution per (state, action). States the environment
// controls outright are modeled with a single forced action, so every
// state has at least one action row.
class Mdp {
 public:
  Mdp() = default;  // empty placeholder; any use fails validation downstream
  Mdp(std::vector<std::vector<std::vector<double>>> kernel,
      NodeSet unsafe = {});

  int n() const { return n_; }
  int num_actions(Node i) const {
    return static_cast<int>(kernel_[static_cast<size_t>(i)].size());
  }
  int total_actions() const { return total_actions_; }
  const std::vector<double>& row(Node i, int a) const {
    return kernel_[static_cast<size_t>(i)][static_cast<size_t>(a)];
  }
  const NodeSet& unsafe() const { return unsafe_; }
  Mdp with_unsafe(NodeSet r) const {
    Mdp m = *this;
    m.unsafe_ = std::move(r);
    return m;
  }

 private:
  int n_ = 0;
  int total_actions_ = 0;
  std::vector<std::vector<std::vector<double>>> kernel_;
  NodeSet unsafe_;
};

// Stationary deterministic policy: one action index per state.
struct Policy {
  std::vector<int> choice;
  int operator()(Node i) const { return choice[static_cast<size_t>(i)]; }
};

// Sub-MDP closed under its allowed actions. `allowed[k]` lists the
// allowed action indices of states.members()[k].
struct EndComponent {
  NodeSet states;
  std::vector<std::vector<int>> allowed;

  const std::vector<int>& actions_of(Node i) const;
};

// Markov chain induced by a stationary policy: row i = kernel(i, mu(i)).
StochasticGraph induced_chain(const Mdp& m, const Policy& mu);

// Unique decomposition into maximal end components, by iterated SCC
// computation and pruning of actions that leave their component.
std::vector<EndComponent> mec_decomposition(const Mdp& m);

// Keep only the MECs whose state sets avoid R.
std::vector<EndComponent> amec_filter(const std::vector<EndComponent>& mecs,
                                      const NodeSet& R);

// Sub-MDP on an end component, with states renumbered 0..|V'|-1.
// `to_parent[k]` maps the restricted state k back to the parent index.
struct RestrictedMdp {
  Mdp mdp;
  std::vector<Node> to_parent;

  NodeSet restrict_set(const NodeSet& parent_set) const;
};
RestrictedMdp restrict_to_component(const Mdp& m, const EndComponent& ec);

// Grid-world MDP of rows x cols cells with actions {left,right,up,down}.
// The chosen direction is taken with probability p_c, otherwise a
// uniformly random direction; mass on off-grid moves is redistributed
// uniformly over the feasible steps.
Mdp gen_lattice_mdp(int rows, int cols, double p_c);
inline Node lattice_state(int r, int c, int cols) { return r * cols + c; }

// n states, 4 actions each, rows drawn uniformly from the simplex.
Mdp gen_random_mdp(int n, std::uint64_t seed);

// JSON round trip. Schema: {"n": int, "actions": [int per state],
// "transitions": [[i,a,j,p], ...], "unsafe": [int...]} with every
// (i,a) row required to sum to 1 within 1e-9.
Mdp load_mdp_json(const std::string& path);
void save_mdp_json(const Mdp& m, const std::string& path);

}  // namespace walkopt
