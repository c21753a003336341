#include "walkopt/mdp_solvers.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace walkopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// States from which S is reachable through some action sequence.
std::vector<char> can_reach(const Mdp& m, const NodeSet& S) {
  std::vector<char> mark(static_cast<size_t>(m.n()), 0);
  std::deque<Node> queue;
  for (Node s : S) {
    mark[static_cast<size_t>(s)] = 1;
    queue.push_back(s);
  }
  // Reverse closure over positive-probability edges.
  std::vector<std::vector<Node>> rev(static_cast<size_t>(m.n()));
  for (Node i = 0; i < m.n(); ++i)
    for (int a = 0; a < m.num_actions(i); ++a) {
      const auto& row = m.row(i, a);
      for (Node j = 0; j < m.n(); ++j)
        if (row[static_cast<size_t>(j)] > 0.0)
          rev[static_cast<size_t>(j)].push_back(i);
    }
  while (!queue.empty()) {
    const Node u = queue.front();
    queue.pop_front();
    for (Node i : rev[static_cast<size_t>(u)])
      if (!mark[static_cast<size_t>(i)]) {
        mark[static_cast<size_t>(i)] = 1;
        queue.push_back(i);
      }
  }
  return mark;
}

double q_value(const Mdp& m, Node i, int a, const std::vector<double>& h) {
  const auto& row = m.row(i, a);
  double v = 0.0;
  for (Node j = 0; j < m.n(); ++j) {
    const double p = row[static_cast<size_t>(j)];
    if (p > 0.0) v += p * h[static_cast<size_t>(j)];
  }
  return v;
}

}  // namespace

std::vector<double> min_hitting_time_vi(const Mdp& m, const NodeSet& S,
                                        double tol, long max_iters) {
  if (S.empty()) throw ValidationError("min_hitting_time_vi: empty S");
  if (!S.members().empty() && S.members().back() >= m.n())
    throw ValidationError("min_hitting_time_vi: node out of range");
  const auto reach = can_reach(m, S);
  {
    std::vector<Node> bad;
    for (Node i = 0; i < m.n(); ++i)
      if (!reach[static_cast<size_t>(i)]) bad.push_back(i);
    if (!bad.empty())
      throw AlgorithmError("min_hitting_time_vi: S unreachable from states " +
                           NodeSet(bad).to_string());
  }

  std::vector<double> h(static_cast<size_t>(m.n()), 0.0);
  std::vector<double> next(h);
  for (long it = 0; it < max_iters; ++it) {
    double diff = 0.0;
    for (Node i = 0; i < m.n(); ++i) {
      if (S.contains(i)) {
        next[static_cast<size_t>(i)] = 0.0;
        continue;
      }
      double best = kInf;
      for (int a = 0; a < m.num_actions(i); ++a)
        best = std::min(best, q_value(m, i, a, h));
      next[static_cast<size_t>(i)] = 1.0 + best;
      diff = std::max(diff, std::abs(next[static_cast<size_t>(i)] -
                                     h[static_cast<size_t>(i)]));
    }
    h.swap(next);
    if (diff <= tol) return h;
    if (diff >= 1.0 - 1e-9 && it > 64L * m.n() && it > 4096) {
      // Divergent entries grow by ~1 per sweep once the reachable part
      // has settled; surface the worst offenders.
      std::vector<Node> worst;
      for (Node i = 0; i < m.n(); ++i)
        if (h[static_cast<size_t>(i)] > static_cast<double>(it) * 0.5)
          worst.push_back(i);
      throw AlgorithmError(
          "min_hitting_time_vi: divergence, S not almost-surely reachable "
          "from states " +
          NodeSet(worst).to_string());
    }
  }
  throw AlgorithmError("min_hitting_time_vi: no convergence within cap");
}

Policy min_hitting_policy(const Mdp& m, const NodeSet& S,
                          const std::vector<double>& values) {
  Policy mu;
  mu.choice.assign(static_cast<size_t>(m.n()), 0);
  for (Node i = 0; i < m.n(); ++i) {
    if (S.contains(i)) continue;
    double best = kInf;
    for (int a = 0; a < m.num_actions(i); ++a) {
      const double q = q_value(m, i, a, values);
      if (q < best - 1e-12) {
        best = q;
        mu.choice[static_cast<size_t>(i)] = a;
      }
    }
  }
  return mu;
}

namespace {

// Optimal gain of the average-cost MDP with step cost
// c(i,a) = 1 - lambda * P(i,a,S), found by damped relative value
// iteration. The damping makes the evaluation robust to periodic
// optimal chains (deterministic cycles).
struct GainResult {
  double gain = 0.0;
  std::vector<double> bias;
  long sweeps = 0;
  bool converged = false;
};

GainResult acpc_gain(const Mdp& m, const std::vector<std::vector<double>>& ps,
                     double lambda, const std::vector<double>& h0, double tol,
                     long max_iters) {
  const double damp = 0.5;
  std::vector<double> h = h0;
  std::vector<double> th(static_cast<size_t>(m.n()), 0.0);
  GainResult res;
  for (long it = 0; it < max_iters; ++it) {
    double lo = kInf, hi = -kInf;
    for (Node i = 0; i < m.n(); ++i) {
      double best = kInf;
      for (int a = 0; a < m.num_actions(i); ++a) {
        const double c = 1.0 - lambda * ps[static_cast<size_t>(i)][static_cast<size_t>(a)];
        best = std::min(best, c + q_value(m, i, a, h));
      }
      th[static_cast<size_t>(i)] = best;
      const double delta = best - h[static_cast<size_t>(i)];
      lo = std::min(lo, delta);
      hi = std::max(hi, delta);
    }
    res.sweeps = it + 1;
    if (hi - lo <= tol) {
      res.gain = 0.5 * (hi + lo);
      res.bias = h;
      res.converged = true;
      return res;
    }
    // Damped update with re-centering at state 0.
    const double center = damp * th[0] + (1.0 - damp) * h[0];
    for (Node i = 0; i < m.n(); ++i)
      h[static_cast<size_t>(i)] = damp * th[static_cast<size_t>(i)] +
                                  (1.0 - damp) * h[static_cast<size_t>(i)] -
                                  center;
  }
  // Report the best available estimate.
  double lo = kInf, hi = -kInf;
  for (Node i = 0; i < m.n(); ++i) {
    const double delta = th[static_cast<size_t>(i)] - h[static_cast<size_t>(i)];
    lo = std::min(lo, delta);
    hi = std::max(hi, delta);
  }
  res.gain = 0.5 * (hi + lo);
  res.bias = h;
  res.converged = false;
  return res;
}

}  // namespace

AcpcSolution acpc_optimal(const Mdp& m, const NodeSet& S, double tol,
                          std::vector<double> initial_bias) {
  if (S.empty()) throw ValidationError("acpc_optimal: empty S");
  if (!initial_bias.empty() &&
      static_cast<int>(initial_bias.size()) != m.n())
    throw ValidationError("acpc_optimal: initial bias size mismatch");
  if (!S.members().empty() && S.members().back() >= m.n())
    throw ValidationError("acpc_optimal: node out of range");
  {
    const auto reach = can_reach(m, S);
    for (Node i = 0; i < m.n(); ++i)
      if (!reach[static_cast<size_t>(i)])
        throw AlgorithmError(
            "acpc_optimal: no policy reaches S infinitely often (state " +
            std::to_string(i) + " cannot reach S)");
  }

  // Per-(state,action) mass landed in S.
  std::vector<std::vector<double>> ps(static_cast<size_t>(m.n()));
  for (Node i = 0; i < m.n(); ++i)
    for (int a = 0; a < m.num_actions(i); ++a) {
      double mass = 0.0;
      const auto& row = m.row(i, a);
      for (Node s : S) mass += row[static_cast<size_t>(s)];
      ps[static_cast<size_t>(i)].push_back(mass);
    }

  const double inner_tol = std::min(1e-10, tol * 1e-2);
  const long inner_cap = 200000;
  std::vector<double> h0 = initial_bias.empty()
                               ? std::vector<double>(static_cast<size_t>(m.n()), 0.0)
                               : std::move(initial_bias);
  AcpcSolution sol;

  // The gain at lambda = 0 is 1; grow the upper end until the gain turns
  // non-positive. Gain is concave and decreasing in lambda.
  double lo = 0.0, hi = 2.0;
  GainResult g;
  for (int guard = 0;; ++guard) {
    g = acpc_gain(m, ps, hi, h0, inner_tol, inner_cap);
    sol.evaluations += g.sweeps;
    if (!g.converged)
      throw AlgorithmError("acpc_optimal: inner iteration did not converge");
    if (g.gain <= 0.0) break;
    h0 = g.bias;
    lo = hi;
    hi *= 2.0;
    if (guard > 60)
      throw AlgorithmError(
          "acpc_optimal: unbounded lambda, no policy reaches S infinitely "
          "often");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    g = acpc_gain(m, ps, mid, h0, inner_tol, inner_cap);
    sol.evaluations += g.sweeps;
    if (!g.converged)
      throw AlgorithmError("acpc_optimal: inner iteration did not converge");
    h0 = g.bias;
    if (g.gain > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  sol.lambda = 0.5 * (lo + hi);

  // Greedy policy at the final lambda/bias pair.
  g = acpc_gain(m, ps, sol.lambda, h0, inner_tol, inner_cap);
  sol.evaluations += g.sweeps;
  sol.policy.choice.assign(static_cast<size_t>(m.n()), 0);
  for (Node i = 0; i < m.n(); ++i) {
    double best = kInf;
    for (int a = 0; a < m.num_actions(i); ++a) {
      const double c =
          1.0 - sol.lambda * ps[static_cast<size_t>(i)][static_cast<size_t>(a)];
      const double q = c + q_value(m, i, a, g.bias);
      if (q < best - 1e-12) {
        best = q;
        sol.policy.choice[static_cast<size_t>(i)] = a;
      }
    }
  }
  return sol;
}

AcpcEvaluation acpc_eval(const Mdp& m, const Policy& mu, const NodeSet& S,
                         long horizon, std::uint64_t seed) {
  if (S.empty()) throw ValidationError("acpc_eval: empty S");
  if (horizon < 1) throw ValidationError("acpc_eval: horizon < 1");
  const StochasticGraph chain = induced_chain(m, mu);

  AcpcEvaluation out;
  const SamplePath path = simulate_path(chain, 0, horizon, seed);
  std::vector<long> gaps;
  long last_visit = -1;
  for (long t = 1; t <= horizon; ++t) {
    if (S.contains(path.states[static_cast<size_t>(t)])) {
      ++out.visits;
      if (last_visit >= 0) gaps.push_back(t - last_visit);
      last_visit = t;
    }
  }
  if (out.visits == 0) {
    out.diverged = true;
    out.per_cycle.mean = std::numeric_limits<double>::infinity();
    return out;
  }
  out.per_cycle.samples = static_cast<long>(gaps.size());
  if (gaps.empty()) {
    // A single visit: fall back to the crude horizon ratio.
    out.per_cycle.mean = static_cast<double>(horizon) / 1.0;
  } else {
    double sum = 0.0, sum_sq = 0.0;
    for (long gap : gaps) {
      sum += static_cast<double>(gap);
      sum_sq += static_cast<double>(gap) * static_cast<double>(gap);
    }
    out.per_cycle.mean = sum / static_cast<double>(gaps.size());
    if (gaps.size() > 1) {
      const double var = std::max(
          0.0, (sum_sq - sum * sum / static_cast<double>(gaps.size())) /
                   static_cast<double>(gaps.size() - 1));
      out.per_cycle.half_width =
          1.96 * std::sqrt(var / static_cast<double>(gaps.size()));
    }
  }
  try {
    const Distribution pi = stationary_distribution(chain, 1e-12, 200000);
    double mass = 0.0;
    for (Node s : S) mass += pi[s];
    if (mass > 0.0) out.stationary_exact = 1.0 / mass;
  } catch (const AlgorithmError&) {
    // Non-ergodic induced chain: simulation estimate only.
  }
  return out;
}

}  // namespace walkopt
