#include "walkopt/joint.hpp"

#include <cmath>

#include "walkopt/lp.hpp"

namespace walkopt {

JointInstance JointInstance::build(Mdp m, NodeSet R, int k) {
  JointInstance inst;
  inst.amecs = amec_filter(mec_decomposition(m), R);
  inst.mdp = std::move(m);
  inst.R = std::move(R);
  inst.k = k;
  return inst;
}

JointMatroidResult joint_matroid(const std::vector<EndComponent>& amecs,
                                 int k) {
  const int N = static_cast<int>(amecs.size());
  std::vector<NodeSet> blocks;
  blocks.reserve(amecs.size());
  for (const auto& ec : amecs) blocks.push_back(ec.states);
  JointMatroidResult out{
      Matroid::union_of(Matroid::partition(std::move(blocks)),
                        Matroid::uniform(std::max(0, k - N))),
      k >= N, ""};
  if (k < N)
    out.warning = "budget " + std::to_string(k) + " below AMEC count " +
                  std::to_string(N) +
                  ": maximum reachability is unattainable at this budget";
  return out;
}

namespace {

// Greedy emptiness cover inside one restricted AMEC; returns parent ids.
struct AmecCover {
  bool covered = false;
  NodeSet parent_states;
  GreedyReport report;
  double r_empty = 0.0;  // sampled r_lambda of the empty set
};

AmecCover cover_amec(const RestrictedMdp& sub, double lambda, double zeta,
                     const AcpcSelectConfig& cfg) {
  const RLambdaSampler sampler(sub.mdp, lambda, zeta, cfg.n_samples, cfg.seed);
  const bool use_samples = sampler.base_count() > 0;
  SetFunction f = [&](const NodeSet& S) {
    if (use_samples) return sampler.value(S);
    return std::max(
        0.0, polytope_margin(build_acpc_polytope(sub.mdp, S, lambda, zeta)));
  };
  GreedyOptions opts;
  opts.confirmations = cfg.confirmations;
  opts.stop = [&](const NodeSet& S) {
    return polytope_empty_interior(
        build_acpc_polytope(sub.mdp, S, lambda, zeta), cfg.lp_tol);
  };
  AmecCover out;
  out.r_empty = sampler.value(NodeSet{});
  try {
    out.report = greedy_min_cover(f, NodeSet::full(sub.mdp.n()), 0.0, opts);
    out.covered = true;
  } catch (const AlgorithmError&) {
    return out;
  }
  std::vector<Node> parents;
  for (Node local : out.report.chosen)
    parents.push_back(sub.to_parent[static_cast<size_t>(local)]);
  out.parent_states = NodeSet(parents);
  return out;
}

}  // namespace

AcpcSelection min_acpc_max_reach(const JointInstance& inst, double delta,
                                 const AcpcSelectConfig& cfg) {
  const int N = static_cast<int>(inst.amecs.size());
  if (N == 0)
    throw AlgorithmError("min_acpc_max_reach: no accepting MECs to reach");
  if (inst.k < N)
    throw ValidationError(
        "min_acpc_max_reach: budget below AMEC count, coverage impossible");
  if (delta <= 0.0) throw ValidationError("min_acpc_max_reach: delta <= 0");

  std::vector<RestrictedMdp> subs;
  subs.reserve(inst.amecs.size());
  for (const auto& ec : inst.amecs)
    subs.push_back(restrict_to_component(inst.mdp, ec));

  double lambda_max = 0.0;
  for (const auto& sub : subs)
    for (Node v = 0; v < sub.mdp.n(); ++v)
      lambda_max = std::max(
          lambda_max, acpc_optimal(sub.mdp, NodeSet{v}, cfg.oracle_tol).lambda);
  const double zeta_of = [](const Mdp& m) {
    return 10.0 * static_cast<double>(m.n());
  }(inst.mdp);

  const auto cover_all = [&](double lambda) {
    struct Outcome {
      bool feasible = false;
      NodeSet set;
      GreedyReport merged;
    } out;
    int total = 0;
    for (const auto& sub : subs) {
      AmecCover c = cover_amec(sub, lambda, zeta_of, cfg);
      if (!c.covered) return out;
      total += c.parent_states.size();
      out.set = out.set.unite(c.parent_states);
      for (size_t t = 0; t < c.report.trace.size(); ++t)
        out.merged.trace.push_back(
            {sub.to_parent[static_cast<size_t>(c.report.trace[t].first)],
             c.report.trace[t].second});
      out.merged.evaluations += c.report.evaluations;
    }
    out.merged.chosen = out.set;
    out.feasible = total <= inst.k;
    return out;
  };

  double lambda_min = 0.0;
  AcpcSelection best;
  bool have = false;
  for (int guard = 0;; ++guard) {
    auto out = cover_all(lambda_max);
    if (out.feasible) {
      best.chosen = out.set;
      best.greedy_report = out.merged;
      have = true;
      break;
    }
    lambda_min = lambda_max;
    lambda_max *= 2.0;
    if (guard > 60)
      throw AlgorithmError("min_acpc_max_reach: infeasible budget at lambda_max");
  }
  while (lambda_max - lambda_min > delta) {
    const double lambda = 0.5 * (lambda_min + lambda_max);
    auto out = cover_all(lambda);
    if (out.feasible) {
      lambda_max = lambda;
      best.chosen = out.set;
      best.greedy_report = out.merged;
      have = true;
    } else {
      lambda_min = lambda;
    }
  }
  if (!have)
    throw AlgorithmError("min_acpc_max_reach: no feasible selection found");
  best.lambda_hat = lambda_max;

  // Worst per-AMEC exact ACPC of the chosen states.
  double cert = 0.0;
  for (size_t mi = 0; mi < subs.size(); ++mi) {
    const NodeSet local = subs[mi].restrict_set(best.chosen);
    if (local.empty())
      throw AlgorithmError("min_acpc_max_reach: an AMEC was left uncovered");
    cert = std::max(cert,
                    acpc_optimal(subs[mi].mdp, local, cfg.oracle_tol).lambda);
  }
  best.certificate = cert;

  // Logarithmic size bound over the summed sampled volumes at the
  // final level.
  {
    std::vector<RLambdaSampler> samplers;
    for (const auto& sub : subs)
      samplers.emplace_back(sub.mdp, best.lambda_hat, zeta_of, cfg.n_samples,
                            cfg.seed);
    double r_empty = 0.0;
    for (size_t mi = 0; mi < subs.size(); ++mi)
      r_empty += samplers[mi].value(NodeSet{});
    double min_drop = std::numeric_limits<double>::infinity();
    for (Node v : best.chosen) {
      double r_minus = 0.0;
      for (size_t mi = 0; mi < subs.size(); ++mi)
        r_minus += samplers[mi].value(
            subs[mi].restrict_set(best.chosen.without(v)));
      min_drop = std::min(min_drop, r_minus);
    }
    best.greedy_report.bound =
        (min_drop > 0.0 && r_empty > 0.0)
            ? 1.0 + std::log(r_empty / min_drop)
            : std::numeric_limits<double>::infinity();
  }
  return best;
}

NodeSet AugmentedMdp::goal_states() const {
  std::vector<Node> goals;
  for (int g = 0; g < num_goals; ++g) goals.push_back(first_goal + g);
  return NodeSet(goals);
}

NodeSet AugmentedMdp::map_set(const NodeSet& parent_set) const {
  std::vector<Node> mapped;
  for (Node v : parent_set) {
    const int t = old_to_new[static_cast<size_t>(v)];
    if (t < 0)
      throw ValidationError("AugmentedMdp::map_set: state lies inside an AMEC");
    mapped.push_back(t);
  }
  return NodeSet(mapped);
}

AugmentedMdp augmented_mdp(const Mdp& m,
                           const std::vector<EndComponent>& amecs) {
  for (size_t i = 0; i < amecs.size(); ++i)
    for (size_t j = i + 1; j < amecs.size(); ++j)
      if (!amecs[i].states.disjoint_from(amecs[j].states))
        throw ValidationError("augmented_mdp: AMEC state sets overlap");

  AugmentedMdp out;
  const int N = static_cast<int>(amecs.size());
  std::vector<int> amec_of(static_cast<size_t>(m.n()), -1);
  for (int g = 0; g < N; ++g)
    for (Node v : amecs[static_cast<size_t>(g)].states)
      amec_of[static_cast<size_t>(v)] = g;

  out.old_to_new.assign(static_cast<size_t>(m.n()), -1);
  int next = 0;
  for (Node v = 0; v < m.n(); ++v)
    if (amec_of[static_cast<size_t>(v)] < 0)
      out.old_to_new[static_cast<size_t>(v)] = next++;
  out.first_goal = next;
  out.num_goals = N;
  const int nn = next + N;

  std::vector<std::vector<std::vector<double>>> kernel(
      static_cast<size_t>(nn));
  for (Node v = 0; v < m.n(); ++v) {
    const int t = out.old_to_new[static_cast<size_t>(v)];
    if (t < 0) continue;
    for (int a = 0; a < m.num_actions(v); ++a) {
      std::vector<double> row(static_cast<size_t>(nn), 0.0);
      const auto& pr = m.row(v, a);
      for (Node j = 0; j < m.n(); ++j) {
        const double p = pr[static_cast<size_t>(j)];
        if (p <= 0.0) continue;
        const int tj = out.old_to_new[static_cast<size_t>(j)];
        if (tj >= 0)
          row[static_cast<size_t>(tj)] += p;
        else
          row[static_cast<size_t>(out.first_goal +
                                  amec_of[static_cast<size_t>(j)])] += p;
      }
      kernel[static_cast<size_t>(t)].push_back(std::move(row));
    }
  }
  // Goal states absorb; the single forced action realizes the empty
  // action set of the construction.
  for (int g = 0; g < N; ++g) {
    std::vector<double> row(static_cast<size_t>(nn), 0.0);
    row[static_cast<size_t>(out.first_goal + g)] = 1.0;
    kernel[static_cast<size_t>(out.first_goal + g)].push_back(std::move(row));
  }

  NodeSet unsafe_mapped;
  {
    std::vector<Node> mapped;
    for (Node r : m.unsafe()) {
      const int t = out.old_to_new[static_cast<size_t>(r)];
      if (t >= 0) mapped.push_back(t);
    }
    unsafe_mapped = NodeSet(mapped);
  }
  out.mdp = Mdp(std::move(kernel), unsafe_mapped);
  return out;
}

namespace {

// Sampled z-system volume over the simplex 1.z = 1, z >= 0 of the
// augmented MDP, with common Dirichlet samples across AMEC subsets.
class ZSampler {
 public:
  ZSampler(const Mdp& aug, int first_goal, int num_goals, double lambda,
           long n_samples, std::uint64_t seed)
      : n_(n_samples) {
    std::vector<double> z;
    for (long s = 0; s < n_samples; ++s) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
      z = sample_simplex(aug.n(), rng);
      bool base = true;
      for (Node i = 0; i < aug.n() && base; ++i) {
        for (int a = 0; a < aug.num_actions(i) && base; ++a) {
          const auto& pr = aug.row(i, a);
          double rhs = 0.0;
          for (Node j = 0; j < aug.n(); ++j)
            rhs += pr[static_cast<size_t>(j)] * z[static_cast<size_t>(j)];
          // S-independent part: z_i >= rhs must already hold off the
          // goal layer; goal rows are handled by the blocked sets.
          if (i < first_goal && z[static_cast<size_t>(i)] < rhs) base = false;
        }
      }
      if (!base) continue;
      ++base_count_;
      std::vector<char> blocked(static_cast<size_t>(num_goals), 0);
      for (int g = 0; g < num_goals; ++g) {
        // Selecting goal g demands z_g (1 - lambda) >= z_g, i.e. z_g = 0.
        if (lambda > 0.0 && z[static_cast<size_t>(first_goal + g)] > 0.0)
          blocked[static_cast<size_t>(g)] = 1;
      }
      blocked_.push_back(std::move(blocked));
    }
  }

  // Relative volume (simplex measure 1) of the samples surviving T.
  double value(const NodeSet& T) const {
    long alive = 0;
    for (const auto& blocked : blocked_) {
      bool cut = false;
      for (Node t : T)
        if (blocked[static_cast<size_t>(t)]) {
          cut = true;
          break;
        }
      if (!cut) ++alive;
    }
    return static_cast<double>(alive) / static_cast<double>(n_);
  }
  long base_count() const { return base_count_; }

 private:
  long n_;
  long base_count_ = 0;
  std::vector<std::vector<char>> blocked_;
};

// Margin-LP emptiness of the z-system for chosen goal set T.
bool z_system_empty(const Mdp& aug, int first_goal, const NodeSet& T,
                    double lambda, double tol) {
  const int n = aug.n();
  LpProblem lp(n + 1);
  const int t = n;
  lp.c[static_cast<size_t>(t)] = -1.0;
  for (int j = 0; j < n; ++j) lp.set_bounds(j, 0.0, 1.0);
  {
    std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
    for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = 1.0;
    lp.add_row(std::move(row), '=', 1.0);
  }
  for (Node i = 0; i < n; ++i) {
    const bool selected =
        i >= first_goal && T.contains(i - first_goal);
    const double scale = 1.0 - (selected ? lambda : 0.0);
    for (int a = 0; a < aug.num_actions(i); ++a) {
      std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
      const auto& pr = aug.row(i, a);
      for (Node j = 0; j < n; ++j)
        row[static_cast<size_t>(j)] = pr[static_cast<size_t>(j)];
      row[static_cast<size_t>(i)] -= scale;
      bool zero = true;
      for (Node j = 0; j < n; ++j)
        if (std::abs(row[static_cast<size_t>(j)]) > 1e-15) {
          zero = false;
          break;
        }
      if (zero) continue;
      row[static_cast<size_t>(t)] = 1.0;
      lp.add_row(std::move(row), '<', 0.0);
    }
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    throw AlgorithmError("z_system_empty: LP returned " + to_string(res.status));
  return -res.value <= tol;
}

}  // namespace

TwoStageResult two_stage_select(const JointInstance& inst, double lambda,
                                const AcpcSelectConfig& cfg) {
  const int N = static_cast<int>(inst.amecs.size());
  if (N == 0) throw AlgorithmError("two_stage_select: no accepting MECs");
  if (lambda <= 0.0) throw ValidationError("two_stage_select: lambda <= 0");

  TwoStageResult out;
  const double zeta = 10.0 * static_cast<double>(inst.mdp.n());
  std::vector<RestrictedMdp> subs;
  for (int mi = 0; mi < N; ++mi) {
    subs.push_back(
        restrict_to_component(inst.mdp, inst.amecs[static_cast<size_t>(mi)]));
    AmecCover c = cover_amec(subs.back(), lambda, zeta, cfg);
    if (!c.covered)
      throw AlgorithmError("two_stage_select: AMEC " + std::to_string(mi) +
                           " cannot meet the cycle bound at lambda = " +
                           std::to_string(lambda));
    out.per_amec_sets.push_back(c.parent_states);
    out.costs.push_back(c.parent_states.size());
  }

  const AugmentedMdp aug = augmented_mdp(inst.mdp, inst.amecs);
  const ZSampler sampler(aug.mdp, aug.first_goal, aug.num_goals, lambda,
                         cfg.n_samples, cfg.seed);

  NodeSet T;
  double r_prev = sampler.value(T);
  out.stage2_bound = std::numeric_limits<double>::infinity();
  while (!z_system_empty(aug.mdp, aug.first_goal, T, lambda, cfg.lp_tol)) {
    if (T.size() == N)
      throw AlgorithmError(
          "two_stage_select: z-system still nonempty with all AMECs chosen");
    Node pick = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    const double r_t = sampler.value(T);
    for (int mi = 0; mi < N; ++mi) {
      if (T.contains(mi)) continue;
      const double drop = r_t - sampler.value(T.with(mi));
      const double ratio =
          drop > 0.0 ? static_cast<double>(out.costs[static_cast<size_t>(mi)]) / drop
                     : std::numeric_limits<double>::infinity();
      if (ratio < best_ratio - 1e-15) {
        best_ratio = ratio;
        pick = mi;
      }
    }
    if (pick < 0) {
      // Dead sample signal: fall back to the cheapest remaining AMEC.
      for (int mi = 0; mi < N; ++mi) {
        if (T.contains(mi)) continue;
        if (pick < 0 || out.costs[static_cast<size_t>(mi)] <
                            out.costs[static_cast<size_t>(pick)])
          pick = mi;
      }
    }
    r_prev = r_t;
    T = T.with(pick);
    out.chosen_amecs.push_back(pick);
  }
  out.stage2_bound =
      r_prev > 0.0 ? 1.0 + std::log(1.0 / r_prev)
                   : std::numeric_limits<double>::infinity();

  for (int mi : out.chosen_amecs)
    out.final_set =
        out.final_set.unite(out.per_amec_sets[static_cast<size_t>(mi)]);
  return out;
}

}  // namespace walkopt
