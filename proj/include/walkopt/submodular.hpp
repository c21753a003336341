#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "walkopt/common.hpp"

namespace walkopt {

using SetFunction = std::function<double(const NodeSet&)>;

// Uniform / partition / union matroid over node indices. Partition
// independence requires membership in some block with at most one
// element per block; union independence is decided by searching splits
// (ground sets here are small).
class Matroid {
 public:
  enum class Kind { Uniform, Partition, Union };

  static Matroid uniform(int rank);
  static Matroid partition(std::vector<NodeSet> blocks);
  static Matroid union_of(Matroid left, Matroid right);

  Kind kind() const { return kind_; }
  int rank() const { return rank_; }
  const std::vector<NodeSet>& blocks() const { return blocks_; }
  const Matroid& left() const { return *left_; }
  const Matroid& right() const { return *right_; }

 private:
  Kind kind_ = Kind::Uniform;
  int rank_ = 0;
  std::vector<NodeSet> blocks_;
  std::shared_ptr<const Matroid> left_, right_;
};

bool is_independent(const Matroid& m, const NodeSet& S);

// Trace of a greedy run: the chosen set, per-step (element, marginal),
// the applicable optimality-bound constant, and the number of function
// evaluations spent.
struct GreedyReport {
  NodeSet chosen;
  std::vector<std::pair<Node, double>> trace;
  double bound = 0.0;
  long evaluations = 0;
};

struct GreedyOptions {
  bool lazy = false;  // priority-queue evaluation (same output as eager)
  int confirmations = 3;  // agreeing re-evaluations of a cover's stop test
  // Optional override of the min-cover termination test (e.g. an LP
  // emptiness certificate); the value function still ranks candidates.
  std::function<bool(const NodeSet&)> stop;
};

// k steps of monotone greedy maximization; ties break to the lowest
// node index. The reported bound is the classical 1 - 1/e constant.
GreedyReport greedy_max_cardinality(const SetFunction& f, const NodeSet& ground,
                                    int k, const GreedyOptions& opts = {});

// Grows S until f(S) <= target (f nonincreasing); reports the Wolsey
// ratio 1 + log{(f(0) - f(V)) / (f(S_prev) - f(V))} computed from the
// run's own trajectory.
GreedyReport greedy_min_cover(const SetFunction& f, const NodeSet& ground,
                              double target, const GreedyOptions& opts = {});

// Greedy over feasible matroid augmentations only; for monotone f the
// result is a basis.
GreedyReport greedy_matroid(const SetFunction& f, const Matroid& m,
                            const NodeSet& ground,
                            const GreedyOptions& opts = {});

enum class DrDirection { Submodular, Supermodular };

struct DrViolation {
  NodeSet small, large;
  Node added = 0;
  double small_gain = 0.0, large_gain = 0.0;
};

// Samples chains S subset T, v outside T, and records every violation of
// the requested diminishing/increasing-returns inequality.
std::vector<DrViolation> check_diminishing_returns(const SetFunction& f,
                                                   const NodeSet& ground,
                                                   int trials,
                                                   DrDirection direction,
                                                   std::uint64_t seed,
                                                   double tol = 1e-9);

}  // namespace walkopt
