#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "walkopt/common.hpp"
#include "walkopt/graph.hpp"

namespace walkopt {

// Point or Monte-Carlo estimate of an expected number of steps.
// half_width is a 95% CI half-width (0 for exact values); samples is 0
// for exact values. flagged marks estimates where more than 1% of the
// sample paths hit the step cap.
struct TimeEstimate {
  double mean = 0.0;
  double half_width = 0.0;
  long samples = 0;
  long cap_hits = 0;
  bool flagged = false;
};

// Prefix-measurable stopping rule for a sample path. Paths are 0-indexed
// (X_0 is the start); a reach rule resolves at the first t >= 0 with
// X_t = node, and a reach-then-return rule at the first t with
// X_t = origin after some earlier visit to node.
struct StoppingTimeSpec {
  enum class Kind { ReachNode, ReachThenReturn, Custom };
  Kind kind = Kind::ReachNode;
  Node node = 0;
  Node origin = 0;
  // Custom rule: receives the path prefix X_0..X_t and reports whether
  // the stopping time is t. Must depend on the prefix only.
  std::function<bool(std::span<const Node>)> predicate;

  static StoppingTimeSpec reach(Node i) {
    return StoppingTimeSpec{Kind::ReachNode, i, 0, nullptr};
  }
  static StoppingTimeSpec reach_then_return(Node i, Node origin) {
    return StoppingTimeSpec{Kind::ReachThenReturn, i, origin, nullptr};
  }
  static StoppingTimeSpec custom(
      std::function<bool(std::span<const Node>)> pred) {
    return StoppingTimeSpec{Kind::Custom, 0, 0, std::move(pred)};
  }
};

// First index where the rule fires, or nullopt if it does not resolve
// within the path.
std::optional<long> realize_stopping_time(const SamplePath& path,
                                          const StoppingTimeSpec& spec);

struct StoppingAggregate {
  double mean = 0.0;
  std::vector<long> per_path;
  long flagged = 0;  // samples where some chosen rule did not resolve
};

enum class AggregateMode { Max, Min };

// Empirical mean over paths of the max/min over the chosen rules'
// realized stopping times. Unresolved rules are cap-resolved at the
// path's last index and counted in `flagged`.
StoppingAggregate stopping_time_aggregate(
    const std::vector<SamplePath>& paths,
    const std::vector<StoppingTimeSpec>& specs, const NodeSet& chosen,
    AggregateMode mode);

// First-visit time of each node along a path (-1 if never visited).
std::vector<long> first_visit_times(const SamplePath& path, int n);

// Exact cover time of S along one path, if every node of S is visited.
std::optional<long> cover_time_on_path(const SamplePath& path, const NodeSet& S);

// E[min{k >= 0 : X_k in S}] for X_0 ~ start. Requires that every state
// reachable from the support of `start` reaches S almost surely.
double hitting_time_exact(const StochasticGraph& g, const NodeSet& S,
                          const Distribution& start);

// Per-start hitting times to S (0 on S); requires every node to reach S.
std::vector<double> hitting_time_vector(const StochasticGraph& g,
                                        const NodeSet& S);

// E[min{k >= 1 : X_k = v, S touched before k}] from X_0 = v, computed on
// the chain doubled with a visited-S flag. With v in S the flag is set
// from step one, so the value equals the expected first return time.
double commute_time_exact(const StochasticGraph& g, Node v, const NodeSet& S);

// Monte-Carlo cover time estimate; paths hitting `cap` count at cap and
// are reported (flagged when more than 1% are capped).
TimeEstimate cover_time_mc(const StochasticGraph& g, Node start,
                           const NodeSet& S, long n_samples, long cap,
                           std::uint64_t seed);

// Exact expected cover time on the product chain (node, visited mask).
// Guarded to |S| <= 15 and a bounded reachable product size.
double cover_time_exact_small(const StochasticGraph& g, Node start,
                              const NodeSet& S);

// Harmonic-sum lower bound max_k alpha_k * c(k) from per-node hitting
// floors; c(k) = 1 + 1/2 + ... + 1/(k-1), c(1) = 0.
double matthews_bound(const std::vector<double>& hit_floor);

// hit_floor(b) = min over a != b of H(a,{b}). The self term is excluded:
// under 0-indexed paths H(b,b) = 0 would void the bound.
std::vector<double> compute_hit_floor(const StochasticGraph& g);

// Which sweep score minimize_matthews uses. FloorBound scores each
// candidate set by the full matthews_bound of its floors; BetaWeight
// scores by beta_k * c(k) with beta_k the k-th smallest floor.
enum class MatthewsSweep { FloorBound, BetaWeight };

// Sweep k = 1..n over the k smallest-floor sets, score minus psi*k,
// smallest scoring set wins (ties to smaller k).
NodeSet minimize_matthews(const StochasticGraph& g, double psi,
                          MatthewsSweep sweep = MatthewsSweep::FloorBound);

// Empirical Pr(cover time of S > L) over a path set fixed by (seed,
// n_samples, L): a deterministic set function of S under common random
// numbers.
double cover_threshold_prob(const StochasticGraph& g, Node start,
                            const NodeSet& S, long L, long n_samples,
                            std::uint64_t seed);

}  // namespace walkopt
