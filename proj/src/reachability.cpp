#include "walkopt/reachability.hpp"

#include <cmath>
#include <map>

namespace walkopt {

namespace {

// Bellman rows x_i >= sum_j P(i,a,j) x_j for i outside R. Rows that are
// identically zero (self-loop actions) are vacuous and skipped.
struct BellmanRows {
  std::vector<std::vector<double>> a;  // coefficients of x
  std::vector<Node> owner;             // row state
};

BellmanRows bellman_rows(const Mdp& m, const NodeSet& R) {
  BellmanRows rows;
  for (Node i = 0; i < m.n(); ++i) {
    if (R.contains(i)) continue;
    for (int act = 0; act < m.num_actions(i); ++act) {
      std::vector<double> a(static_cast<size_t>(m.n()), 0.0);
      const auto& p = m.row(i, act);
      for (Node j = 0; j < m.n(); ++j) a[static_cast<size_t>(j)] = -p[static_cast<size_t>(j)];
      a[static_cast<size_t>(i)] += 1.0;
      bool zero = true;
      for (double v : a)
        if (std::abs(v) > 1e-15) {
          zero = false;
          break;
        }
      if (zero) continue;
      rows.a.push_back(std::move(a));
      rows.owner.push_back(i);
    }
  }
  return rows;
}

LpProblem reach_lp(const Mdp& m, const NodeSet& S, const NodeSet& R,
                   bool pin_s, double rho) {
  LpProblem lp(m.n());
  for (Node i = 0; i < m.n(); ++i) {
    lp.c[static_cast<size_t>(i)] = 1.0;
    lp.set_bounds(i, 0.0, 1.0);
  }
  for (Node r : R) lp.set_bounds(r, 0.0, 0.0);
  if (pin_s) {
    for (Node s : S) lp.set_bounds(s, 1.0, 1.0);
  } else {
    for (Node s : S) lp.c[static_cast<size_t>(s)] -= rho;
  }
  auto rows = bellman_rows(m, R);
  for (auto& a : rows.a) lp.add_row(std::move(a), '>', 0.0);
  return lp;
}

}  // namespace

ReachValue max_reach_exact(const Mdp& m, const NodeSet& S, const NodeSet& R) {
  if (!S.disjoint_from(R))
    throw ValidationError("max_reach_exact: S and R overlap");
  if (!S.empty() && S.members().back() >= m.n())
    throw ValidationError("max_reach_exact: node out of range");
  const LpResult res = solve_lp(reach_lp(m, S, R, /*pin_s=*/true, 0.0));
  if (res.status != LpStatus::Optimal)
    throw AlgorithmError("max_reach_exact: LP solver returned " +
                         to_string(res.status));
  ReachValue out;
  out.x = res.x;
  out.objective = res.value;
  out.policy.choice.assign(static_cast<size_t>(m.n()), 0);
  for (Node i = 0; i < m.n(); ++i) {
    if (S.contains(i) || R.contains(i)) continue;
    double best_residual = std::numeric_limits<double>::infinity();
    for (int a = 0; a < m.num_actions(i); ++a) {
      const auto& p = m.row(i, a);
      double rhs = 0.0;
      for (Node j = 0; j < m.n(); ++j)
        rhs += p[static_cast<size_t>(j)] * out.x[static_cast<size_t>(j)];
      const double residual = out.x[static_cast<size_t>(i)] - rhs;
      if (residual < best_residual - 1e-12) {
        best_residual = residual;
        out.policy.choice[static_cast<size_t>(i)] = a;
      }
    }
  }
  return out;
}

double relaxed_objective(const std::vector<double>& x, const NodeSet& S,
                         double rho) {
  double v = 0.0;
  for (double xi : x) {
    if (xi < -1e-12 || xi > 1.0 + 1e-12)
      throw ValidationError("relaxed_objective: x outside [0,1]");
    v += xi;
  }
  for (Node s : S) v += rho * (1.0 - x[static_cast<size_t>(s)]);
  return v;
}

LpResult solve_relaxed_lp(const Mdp& m, const NodeSet& S, const NodeSet& R,
                          double rho) {
  LpResult res = solve_lp(reach_lp(m, S, R, /*pin_s=*/false, rho));
  // Shift back the constant rho*|S| dropped from the linearized objective.
  if (res.status == LpStatus::Optimal)
    res.value += rho * static_cast<double>(S.size());
  return res;
}

NodeSet s_max(const std::vector<double>& x, int k, const NodeSet& exclude) {
  std::vector<Node> order;
  for (Node i = 0; i < static_cast<int>(x.size()); ++i)
    if (!exclude.contains(i)) order.push_back(i);
  if (k < 0 || k > static_cast<int>(order.size()))
    throw ValidationError("s_max: k out of range");
  std::stable_sort(order.begin(), order.end(), [&](Node a, Node b) {
    return x[static_cast<size_t>(a)] > x[static_cast<size_t>(b)];
  });
  return NodeSet(std::vector<Node>(order.begin(), order.begin() + k));
}

NodeSet s_max(const std::vector<double>& x, const Matroid& constraint,
              const NodeSet& exclude) {
  NodeSet chosen;
  while (true) {
    Node best = -1;
    double best_x = 0.0;
    for (Node i = 0; i < static_cast<int>(x.size()); ++i) {
      if (exclude.contains(i) || chosen.contains(i)) continue;
      if (!is_independent(constraint, chosen.with(i))) continue;
      if (best < 0 || x[static_cast<size_t>(i)] > best_x + 1e-15) {
        best = i;
        best_x = x[static_cast<size_t>(i)];
      }
    }
    if (best < 0) return chosen;
    chosen = chosen.with(best);
  }
}

namespace {

struct SelectionContext {
  const Mdp& m;
  const NodeSet& R;
  int k = 0;
  const Matroid* matroid = nullptr;

  NodeSet pick(const std::vector<double>& x) const {
    return matroid ? s_max(x, *matroid, R) : s_max(x, k, R);
  }
  // The inner maximum of the penalized objective picks the states with
  // the most unmet mass, i.e. the smallest entries.
  NodeSet worst(const std::vector<double>& x) const {
    std::vector<double> neg(x.size());
    for (size_t i = 0; i < x.size(); ++i) neg[i] = 1.0 - x[i];
    return matroid ? s_max(neg, *matroid, R) : s_max(neg, k, R);
  }
};

ReachSelection select_states_impl(const Mdp& m, const NodeSet& R,
                                  const SelectionContext& ctx,
                                  const PenaltyConfig& cfg) {
  const int n = m.n();
  double rho = cfg.rho;
  if (rho == 0.0) rho = static_cast<double>(n) + 1.0;
  if (rho <= static_cast<double>(n))
    throw ValidationError("select_states_reachability: rho must exceed n");

  const auto rows = bellman_rows(m, R);
  const auto minimax_value = [&](const std::vector<double>& x) {
    const NodeSet w = ctx.worst(x);
    return relaxed_objective(x, w, rho);
  };
  const auto feasible = [&](const std::vector<double>& x, double margin) {
    for (Node i = 0; i < n; ++i) {
      const double xi = x[static_cast<size_t>(i)];
      if (R.contains(i)) continue;
      if (xi < margin || xi > 1.0 - margin) return false;
    }
    for (const auto& a : rows.a) {
      double slack = 0.0;
      for (Node j = 0; j < n; ++j)
        slack += a[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      if (slack < margin) return false;
    }
    return true;
  };

  // Interior start from the max-margin LP over the relaxed region.
  std::vector<double> x(static_cast<size_t>(n), 0.0);
  bool have_interior = false;
  {
    LpProblem lp(n + 1);
    const int t = n;
    lp.c[static_cast<size_t>(t)] = -1.0;
    for (Node i = 0; i < n; ++i) lp.set_bounds(i, 0.0, 1.0);
    for (Node r : R) lp.set_bounds(r, 0.0, 0.0);
    lp.set_bounds(t, -1.0, 1.0);
    for (const auto& a : rows.a) {
      std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
      for (Node j = 0; j < n; ++j) row[static_cast<size_t>(j)] = -a[static_cast<size_t>(j)];
      row[static_cast<size_t>(t)] = 1.0;
      lp.add_row(std::move(row), '<', 0.0);  // t <= a.x
    }
    for (Node i = 0; i < n; ++i) {
      if (R.contains(i)) continue;
      std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
      row[static_cast<size_t>(i)] = -1.0;
      row[static_cast<size_t>(t)] = 1.0;
      lp.add_row(row, '<', 0.0);  // t <= x_i
      row[static_cast<size_t>(i)] = 1.0;
      lp.add_row(row, '<', 1.0);  // x_i + t <= 1
    }
    const LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Optimal && res.value < -1e-9) {
      have_interior = true;
      x.assign(res.x.begin(), res.x.begin() + n);
    }
  }

  ReachSelection out;
  double bw = cfg.barrier_weight;
  std::vector<double> best_x = x;
  double best_value = feasible(x, 0.0) ? minimax_value(x)
                                       : std::numeric_limits<double>::infinity();
  std::map<std::vector<Node>, long> candidate_counts;
  std::vector<double> grad(static_cast<size_t>(n));
  long it = 0;
  for (; it < cfg.max_iters; ++it) {
    ++candidate_counts[ctx.pick(x).members()];
    // Descent step on the penalized objective: the subgradient of the
    // inner maximum lives on the states with the most unmet mass, and
    // the step raises exactly those while draining the rest.
    const NodeSet pump = ctx.worst(x);
    std::fill(grad.begin(), grad.end(), -1.0);
    for (Node s : pump) grad[static_cast<size_t>(s)] = rho - 1.0;
    if (have_interior && bw > 0.0) {
      for (const auto& a : rows.a) {
        double slack = 0.0;
        for (Node j = 0; j < n; ++j)
          slack += a[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
        if (slack < 1e-12) slack = 1e-12;
        for (Node j = 0; j < n; ++j)
          grad[static_cast<size_t>(j)] += bw * a[static_cast<size_t>(j)] / slack;
      }
      for (Node i = 0; i < n; ++i) {
        if (R.contains(i)) continue;
        const double xi = std::clamp(x[static_cast<size_t>(i)], 1e-12, 1.0 - 1e-12);
        grad[static_cast<size_t>(i)] += bw * (1.0 / xi - 1.0 / (1.0 - xi));
      }
    }
    double step_norm_sq = 0.0;
    std::vector<double> prev = x;
    for (Node i = 0; i < n; ++i) {
      if (R.contains(i)) {
        x[static_cast<size_t>(i)] = 0.0;
        continue;
      }
      const double step = cfg.delta * grad[static_cast<size_t>(i)];
      x[static_cast<size_t>(i)] =
          std::clamp(x[static_cast<size_t>(i)] + step, 0.0, 1.0);
      const double moved = x[static_cast<size_t>(i)] - prev[static_cast<size_t>(i)];
      step_norm_sq += moved * moved;
    }
    // Backtrack toward the previous iterate if the step left the region.
    if (have_interior) {
      int halvings = 0;
      while (!feasible(x, 1e-13) && halvings < 50) {
        for (Node i = 0; i < n; ++i)
          x[static_cast<size_t>(i)] =
              0.5 * (x[static_cast<size_t>(i)] + prev[static_cast<size_t>(i)]);
        ++halvings;
      }
      if (halvings == 50) x = prev;
    }
    if (feasible(x, 0.0)) {
      const double v = minimax_value(x);
      if (v < best_value) {
        best_value = v;
        best_x = x;
      }
    }
    if ((it + 1) % 100 == 0) bw *= 0.5;
    if (std::sqrt(step_norm_sq) <= cfg.epsilon) {
      out.converged = true;
      ++it;
      break;
    }
  }
  out.iterations = it;

  // Certify the sets proposed along the trajectory (the final and best
  // iterates plus the most frequent picks) and keep the best.
  std::vector<std::pair<long, std::vector<Node>>> ranked;
  for (const auto& [members, count] : candidate_counts)
    ranked.push_back({count, members});
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<NodeSet> candidates = {ctx.pick(x)};
  if (std::isfinite(best_value)) candidates.push_back(ctx.pick(best_x));
  for (size_t r = 0; r < ranked.size() && candidates.size() < 18; ++r)
    candidates.push_back(NodeSet(ranked[r].second));

  bool first = true;
  for (const auto& S : candidates) {
    bool seen = false;
    for (const auto& done : candidates) {
      if (&done == &S) break;
      if (done == S) {
        seen = true;
        break;
      }
    }
    if (seen) continue;
    ReachValue value = max_reach_exact(m, S, R);
    if (first || value.objective > out.achieved) {
      out.chosen = S;
      out.achieved = value.objective;
      out.certificate = std::move(value);
      first = false;
    }
  }

  // Bound the optimum by the min-max value at feasible points: the best
  // iterate and the certificate vector both qualify.
  double bound = std::numeric_limits<double>::infinity();
  if (std::isfinite(best_value)) bound = best_value;
  bound = std::min(bound, minimax_value(out.certificate.x));
  out.upper_bound = bound;
  return out;
}

}  // namespace

ReachSelection select_states_reachability(const Mdp& m, const NodeSet& R,
                                          int k, const PenaltyConfig& cfg) {
  if (k < 1 || k > m.n() - R.size())
    throw ValidationError("select_states_reachability: bad k");
  SelectionContext ctx{m, R, k, nullptr};
  return select_states_impl(m, R, ctx, cfg);
}

ReachSelection select_states_reachability(const Mdp& m, const NodeSet& R,
                                          const Matroid& constraint,
                                          const PenaltyConfig& cfg) {
  SelectionContext ctx{m, R, 0, &constraint};
  return select_states_impl(m, R, ctx, cfg);
}

}  // namespace walkopt
