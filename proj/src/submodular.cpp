#include "walkopt/submodular.hpp"

#include <cmath>
#include <queue>

namespace walkopt {

Matroid Matroid::uniform(int rank) {
  if (rank < 0) throw ValidationError("Matroid::uniform: negative rank");
  Matroid m;
  m.kind_ = Kind::Uniform;
  m.rank_ = rank;
  return m;
}

Matroid Matroid::partition(std::vector<NodeSet> blocks) {
  for (size_t i = 0; i < blocks.size(); ++i)
    for (size_t j = i + 1; j < blocks.size(); ++j)
      if (!blocks[i].disjoint_from(blocks[j]))
        throw ValidationError("Matroid::partition: blocks overlap");
  Matroid m;
  m.kind_ = Kind::Partition;
  m.blocks_ = std::move(blocks);
  return m;
}

Matroid Matroid::union_of(Matroid left, Matroid right) {
  Matroid m;
  m.kind_ = Kind::Union;
  m.left_ = std::make_shared<const Matroid>(std::move(left));
  m.right_ = std::make_shared<const Matroid>(std::move(right));
  return m;
}

namespace {

bool union_split_exists(const Matroid& left, const Matroid& right,
                        const std::vector<Node>& elems, size_t idx,
                        std::vector<Node>& a, std::vector<Node>& b) {
  if (idx == elems.size())
    return is_independent(left, NodeSet(a)) && is_independent(right, NodeSet(b));
  a.push_back(elems[idx]);
  if (union_split_exists(left, right, elems, idx + 1, a, b)) {
    a.pop_back();
    return true;
  }
  a.pop_back();
  b.push_back(elems[idx]);
  const bool ok = union_split_exists(left, right, elems, idx + 1, a, b);
  b.pop_back();
  return ok;
}

}  // namespace

bool is_independent(const Matroid& m, const NodeSet& S) {
  switch (m.kind()) {
    case Matroid::Kind::Uniform:
      return S.size() <= m.rank();
    case Matroid::Kind::Partition: {
      for (const auto& block : m.blocks())
        if (S.intersect(block).size() > 1) return false;
      // Partition independence also requires block membership.
      for (Node v : S) {
        bool in_block = false;
        for (const auto& block : m.blocks())
          if (block.contains(v)) {
            in_block = true;
            break;
          }
        if (!in_block) return false;
      }
      return true;
    }
    case Matroid::Kind::Union: {
      if (S.empty()) return true;
      std::vector<Node> a, b;
      return union_split_exists(m.left(), m.right(), S.members(), 0, a, b);
    }
  }
  return false;
}

namespace {

struct Candidate {
  double gain;
  Node node;
  int stamp;  // size of the set the gain was computed against
};
struct CandidateOrder {
  bool operator()(const Candidate& a, const Candidate& b) const {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;  // lowest index wins ties
  }
};

// One greedy step maximizing the marginal of `objective` over the
// feasible candidates. Lazy mode keeps a stale-bound priority queue,
// valid when marginals only shrink as the set grows.
template <typename Feasible>
bool greedy_loop(const SetFunction& f, const NodeSet& ground,
                 const Feasible& feasible, bool maximize, int max_steps,
                 const GreedyOptions& opts, GreedyReport& report,
                 const std::function<bool(double)>& done_after_step) {
  const double sign = maximize ? 1.0 : -1.0;
  auto value = [&](const NodeSet& S) {
    ++report.evaluations;
    return f(S);
  };

  double current = value(report.chosen);
  if (done_after_step && done_after_step(current)) return true;

  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap;
  if (opts.lazy) {
    for (Node v : ground) {
      if (report.chosen.contains(v) || !feasible(report.chosen, v)) continue;
      const double gain = sign * (value(report.chosen.with(v)) - current);
      heap.push({gain, v, report.chosen.size()});
    }
  }

  for (int step = 0; step < max_steps; ++step) {
    Node best_node = -1;
    double best_gain = 0.0;
    double best_value = 0.0;
    if (opts.lazy) {
      while (!heap.empty()) {
        Candidate top = heap.top();
        heap.pop();
        if (report.chosen.contains(top.node) ||
            !feasible(report.chosen, top.node))
          continue;
        if (top.stamp == report.chosen.size()) {
          best_node = top.node;
          best_gain = top.gain;
          best_value = current + sign * top.gain;
          break;
        }
        const double gain =
            sign * (value(report.chosen.with(top.node)) - current);
        heap.push({gain, top.node, report.chosen.size()});
      }
    } else {
      for (Node v : ground) {
        if (report.chosen.contains(v) || !feasible(report.chosen, v)) continue;
        const double candidate = value(report.chosen.with(v));
        const double gain = sign * (candidate - current);
        if (best_node < 0 || gain > best_gain + 1e-15) {
          best_node = v;
          best_gain = gain;
          best_value = candidate;
        }
      }
    }
    if (best_node < 0) return false;  // no feasible augmentation
    report.chosen = report.chosen.with(best_node);
    report.trace.push_back({best_node, sign * best_gain});
    current = best_value;
    if (done_after_step && done_after_step(current)) return true;
  }
  return false;
}

}  // namespace

GreedyReport greedy_max_cardinality(const SetFunction& f, const NodeSet& ground,
                                    int k, const GreedyOptions& opts) {
  if (k < 0 || k > ground.size())
    throw ValidationError("greedy_max_cardinality: k out of range");
  GreedyReport report;
  report.bound = 1.0 - std::exp(-1.0);
  auto feasible = [](const NodeSet&, Node) { return true; };
  greedy_loop(f, ground, feasible, /*maximize=*/true, k, opts, report,
              nullptr);
  return report;
}

GreedyReport greedy_min_cover(const SetFunction& f, const NodeSet& ground,
                              double target, const GreedyOptions& opts) {
  GreedyReport report;
  auto covered = [&](const NodeSet& S, double last_value) {
    if (opts.stop) return opts.stop(S);
    if (last_value > target) return false;
    // Re-evaluate to guard against a noisy estimator stopping early.
    for (int c = 1; c < opts.confirmations; ++c) {
      ++report.evaluations;
      if (f(S) > target) return false;
    }
    return true;
  };
  double f_empty = 0.0;
  double f_prev = 0.0;
  bool first = true;
  auto done = [&](double current) {
    if (first) {
      f_empty = current;
      first = false;
    }
    const bool ok = covered(report.chosen, current);
    if (!ok) f_prev = current;
    return ok;
  };
  auto feasible = [](const NodeSet&, Node) { return true; };
  const bool reached = greedy_loop(f, ground, feasible, /*maximize=*/false,
                                   ground.size(), opts, report, done);
  if (!reached) {
    ++report.evaluations;
    throw AlgorithmError("greedy_min_cover: target unachievable, f(ground) = " +
                         std::to_string(f(ground)));
  }
  // Wolsey ratio from the run's own trajectory; f(V) is replaced by the
  // target level actually enforced.
  const double denom = f_prev - target;
  const double num = f_empty - target;
  if (report.chosen.empty() || denom <= 0.0 || num <= 0.0)
    report.bound = 1.0;
  else
    report.bound = 1.0 + std::log(num / denom);
  return report;
}

GreedyReport greedy_matroid(const SetFunction& f, const Matroid& m,
                            const NodeSet& ground, const GreedyOptions& opts) {
  GreedyReport report;
  report.bound = 0.5;  // matroid-greedy guarantee for monotone submodular f
  auto feasible = [&](const NodeSet& S, Node v) {
    return is_independent(m, S.with(v));
  };
  greedy_loop(f, ground, feasible, /*maximize=*/true, ground.size(), opts,
              report, nullptr);
  return report;
}

std::vector<DrViolation> check_diminishing_returns(const SetFunction& f,
                                                   const NodeSet& ground,
                                                   int trials,
                                                   DrDirection direction,
                                                   std::uint64_t seed,
                                                   double tol) {
  if (trials < 1) throw ValidationError("check_diminishing_returns: trials < 1");
  std::vector<DrViolation> violations;
  Rng rng(seed);
  const auto& g = ground.members();
  if (g.size() < 2) return violations;
  for (int t = 0; t < trials; ++t) {
    // Random chain S subset T subset ground \ {v}.
    const Node v = g[static_cast<size_t>(rng.uniform_int(static_cast<int>(g.size())))];
    std::vector<Node> small, large;
    for (Node u : g) {
      if (u == v) continue;
      const double r = rng.uniform();
      if (r < 1.0 / 3.0) {
        small.push_back(u);
        large.push_back(u);
      } else if (r < 2.0 / 3.0) {
        large.push_back(u);
      }
    }
    const NodeSet S(small), T(large);
    const double gain_s = f(S.with(v)) - f(S);
    const double gain_t = f(T.with(v)) - f(T);
    const bool ok = direction == DrDirection::Submodular
                        ? gain_s >= gain_t - tol
                        : gain_s <= gain_t + tol;
    if (!ok) violations.push_back({S, T, v, gain_s, gain_t});
  }
  return violations;
}

}  // namespace walkopt
