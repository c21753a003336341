#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "walkopt/experiments.hpp"
#include "walkopt/reachability.hpp"

using namespace walkopt;

namespace {

// 3-state fixture: 0 -> 1 deterministically, 1 in S absorbing, 2 in R.
Mdp chain_fixture() {
  std::vector<std::vector<std::vector<double>>> kernel(3);
  kernel[0] = {{0.0, 1.0, 0.0}};
  kernel[1] = {{0.0, 1.0, 0.0}};
  kernel[2] = {{0.0, 0.0, 1.0}};
  return Mdp(std::move(kernel));
}

// State 1 splits evenly between the S-state 0 and the R-state 2.
Mdp split_fixture() {
  std::vector<std::vector<std::vector<double>>> kernel(3);
  kernel[0] = {{1.0, 0.0, 0.0}};
  kernel[1] = {{0.5, 0.0, 0.5}};
  kernel[2] = {{0.0, 0.0, 1.0}};
  return Mdp(std::move(kernel));
}

// Two actions at state 1: jump to the S-state or to the R-state.
Mdp choice_fixture() {
  std::vector<std::vector<std::vector<double>>> kernel(3);
  kernel[0] = {{1.0, 0.0, 0.0}};
  kernel[1] = {{1.0, 0.0, 0.0}, {0.0, 0.0, 1.0}};
  kernel[2] = {{0.0, 0.0, 1.0}};
  return Mdp(std::move(kernel));
}

}  // namespace

TEST_CASE("exact reachability on hand-solved fixtures") {
  {
    const auto r = max_reach_exact(chain_fixture(), NodeSet{1}, NodeSet{2});
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.x[2] == doctest::Approx(0.0));
    CHECK(r.objective == doctest::Approx(2.0).epsilon(1e-9));
  }
  {
    const auto r = max_reach_exact(split_fixture(), NodeSet{0}, NodeSet{2});
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-9));
  }
  {
    // S = all non-R states.
    const auto r = max_reach_exact(split_fixture(), NodeSet{0, 1}, NodeSet{2});
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
  }
  {
    const auto r = max_reach_exact(choice_fixture(), NodeSet{0}, NodeSet{2});
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.policy.choice[1] == 0);
  }
  CHECK_THROWS_AS(max_reach_exact(chain_fixture(), NodeSet{1}, NodeSet{1}),
                  ValidationError);
}

TEST_CASE("reachability LP matches value iteration on random MDPs") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Mdp m = gen_random_mdp(6, seed + 300);
    const NodeSet S{0, 3};
    const NodeSet R{5};
    const auto lp = max_reach_exact(m, S, R);
    const auto vi = oracles::reach_vi(m, S, R);
    for (Node i = 0; i < 6; ++i)
      CHECK(lp.x[static_cast<size_t>(i)] ==
            doctest::Approx(vi[static_cast<size_t>(i)]).epsilon(1e-8));
    // The extracted policy's action binds the Bellman inequality.
    for (Node i = 0; i < 6; ++i) {
      if (S.contains(i) || R.contains(i)) continue;
      const auto& row = m.row(i, lp.policy.choice[static_cast<size_t>(i)]);
      double rhs = 0.0;
      for (Node j = 0; j < 6; ++j)
        rhs += row[static_cast<size_t>(j)] * lp.x[static_cast<size_t>(j)];
      CHECK(lp.x[static_cast<size_t>(i)] == doctest::Approx(rhs).epsilon(1e-7));
    }
  }
}

TEST_CASE("exact reachability is monotone in S") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Mdp m = gen_random_mdp(6, seed + 31);
    const NodeSet R{5};
    double prev = 0.0;
    NodeSet S;
    for (Node v : {0, 2, 3}) {
      S = S.with(v);
      const double obj = max_reach_exact(m, S, R).objective;
      CHECK(obj >= prev - 1e-9);
      prev = obj;
    }
  }
}

TEST_CASE("minimal fixed point: lowering any free coordinate breaks feasibility") {
  const Mdp m = gen_random_mdp(5, 8);
  const NodeSet S{1}, R{4};
  const auto r = max_reach_exact(m, S, R);
  for (Node i = 0; i < 5; ++i) {
    if (S.contains(i) || R.contains(i)) continue;
    if (r.x[static_cast<size_t>(i)] < 1e-9) continue;
    auto x = r.x;
    x[static_cast<size_t>(i)] -= 1e-6;
    bool violated = false;
    for (int a = 0; a < m.num_actions(i) && !violated; ++a) {
      const auto& row = m.row(i, a);
      double rhs = 0.0;
      for (Node j = 0; j < 5; ++j)
        rhs += row[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      if (x[static_cast<size_t>(i)] < rhs - 1e-12) violated = true;
    }
    CHECK(violated);
  }
}

TEST_CASE("relaxed objective arithmetic") {
  CHECK(relaxed_objective({1.0, 0.2, 1.0}, NodeSet{0, 2}, 4.0) ==
        doctest::Approx(2.2));
  CHECK(relaxed_objective({0.0, 0.0, 0.0}, NodeSet{0, 1}, 4.0) ==
        doctest::Approx(8.0));
  CHECK_THROWS_AS(relaxed_objective({1.5}, NodeSet{0}, 4.0), ValidationError);
}

TEST_CASE("penalty relaxation equals the pinned LP for rho > n") {
  const std::vector<Mdp> fixtures = {chain_fixture(), split_fixture(),
                                     choice_fixture(), gen_random_mdp(5, 3),
                                     gen_random_mdp(6, 4)};
  for (const auto& m : fixtures) {
    const NodeSet S{0, 1};
    const NodeSet R{m.n() - 1};
    if (!S.disjoint_from(R)) continue;
    const double rho = static_cast<double>(m.n()) + 1.0;
    const auto pinned = max_reach_exact(m, S, R);
    const auto relaxed = solve_relaxed_lp(m, S, R, rho);
    REQUIRE(relaxed.status == LpStatus::Optimal);
    CHECK(relaxed.value == doctest::Approx(pinned.objective).epsilon(1e-6));
    for (Node s : S)
      CHECK(relaxed.x[static_cast<size_t>(s)] ==
            doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("min-max bound dominates the max-min optimum") {
  // The min-max value at any feasible point upper-bounds the
  // exhaustive max-min optimum.
  const Mdp m = gen_random_mdp(5, 17);
  const NodeSet R{4};
  const int k = 2;
  double opt = 0.0;
  for (const auto& S : oracles::subsets_up_to(5, k)) {
    if (!S.disjoint_from(R)) continue;
    opt = std::max(opt, max_reach_exact(m, S, R).objective);
  }
  PenaltyConfig cfg;
  cfg.max_iters = 4000;
  const auto sel = select_states_reachability(m, R, k, cfg);
  CHECK(sel.upper_bound >= opt - 1e-7);
  CHECK(sel.achieved <= opt + 1e-9);
}

TEST_CASE("s_max selection") {
  CHECK(s_max({0.9, 0.1, 0.5}, 2) == NodeSet{0, 2});
  CHECK(s_max({0.5, 0.5, 0.1}, 1) == NodeSet{0});  // tie to the lowest index
  CHECK(s_max({0.9, 0.1, 0.5}, 1, NodeSet{0}) == NodeSet{2});

  // Partition-matroid mode picks the per-block maximum.
  const auto part = Matroid::partition({NodeSet{0, 1}, NodeSet{2, 3}});
  const std::vector<double> x{0.2, 0.8, 0.9, 0.3};
  CHECK(s_max(x, part) == NodeSet{1, 2});
  double best = -1.0;
  NodeSet best_set;
  for (const auto& S : oracles::subsets_up_to(4, 4)) {
    if (!is_independent(part, S)) continue;
    double v = 0.0;
    for (Node i : S) v += x[static_cast<size_t>(i)];
    if (v > best) {
      best = v;
      best_set = S;
    }
  }
  CHECK(s_max(x, part) == best_set);
}

TEST_CASE("barrier-subgradient selection on a forced fixture") {
  // One accepting absorbing state: any sensible k = 1 choice reaches it
  // with probability 1 from everywhere.
  std::vector<std::vector<std::vector<double>>> kernel(4);
  kernel[0] = {{0.0, 0.6, 0.4, 0.0}};
  kernel[1] = {{0.0, 1.0, 0.0, 0.0}};
  kernel[2] = {{0.0, 0.5, 0.0, 0.5}};
  kernel[3] = {{0.0, 0.0, 0.0, 1.0}};  // unsafe absorbing
  const Mdp m(std::move(kernel), NodeSet{3});
  PenaltyConfig cfg;
  cfg.max_iters = 5000;
  const auto sel = select_states_reachability(m, NodeSet{3}, 1, cfg);
  CHECK(sel.chosen == NodeSet{1});
  CHECK(sel.achieved > 1.9);  // states 0 and 1 reach it surely, 2 with 1/2
  CHECK(sel.upper_bound >= sel.achieved - 1e-9);
}

TEST_CASE("selection beats random baselines on average") {
  const Mdp m = gen_random_mdp(7, 123);
  const NodeSet R{6};
  const int k = 2;
  PenaltyConfig cfg;
  cfg.max_iters = 4000;
  const auto sel = select_states_reachability(m, R, k, cfg);
  double random_mean = 0.0;
  const NodeSet candidates = NodeSet::full(7).without(6);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const NodeSet S = baseline_random(candidates, k, s);
    random_mean += max_reach_exact(m, S, R).objective;
  }
  random_mean /= 20.0;
  CHECK(sel.achieved >= random_mean - 1e-9);
}

TEST_CASE("matroid-constrained selection stays independent") {
  const Mdp m = gen_random_mdp(6, 5);
  const NodeSet R{5};
  const auto part = Matroid::partition({NodeSet{0, 1, 2}, NodeSet{3, 4}});
  PenaltyConfig cfg;
  cfg.max_iters = 3000;
  const auto sel = select_states_reachability(m, R, part, cfg);
  CHECK(is_independent(part, sel.chosen));
  CHECK(sel.chosen.size() == 2);
}

TEST_CASE("a fully reachable communicating MDP yields full reach at k = 1") {
  // Dense kernel: one MEC spanning the whole space, no unsafe states;
  // any single target is reached with probability 1 from everywhere.
  const Mdp m = gen_random_mdp(6, 99);
  PenaltyConfig cfg;
  cfg.max_iters = 3000;
  const auto sel = select_states_reachability(m, NodeSet{}, 1, cfg);
  CHECK(sel.chosen.size() == 1);
  CHECK(sel.achieved == doctest::Approx(6.0).epsilon(1e-6));
}
