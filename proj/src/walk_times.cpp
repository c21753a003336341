#include "walkopt/walk_times.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <deque>
#include <limits>

namespace walkopt {

namespace {

using Adjacency = std::vector<std::vector<std::pair<int, double>>>;

std::vector<char> forward_reachable(const Adjacency& adj,
                                    const std::vector<int>& starts,
                                    const std::vector<char>* stop_at = nullptr) {
  std::vector<char> seen(adj.size(), 0);
  std::deque<int> queue;
  for (int s : starts)
    if (!seen[static_cast<size_t>(s)]) {
      seen[static_cast<size_t>(s)] = 1;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (stop_at && (*stop_at)[static_cast<size_t>(u)]) continue;
    for (const auto& [v, p] : adj[static_cast<size_t>(u)])
      if (p > 0.0 && !seen[static_cast<size_t>(v)]) {
        seen[static_cast<size_t>(v)] = 1;
        queue.push_back(v);
      }
  }
  return seen;
}

// Expected steps to reach the absorbing set from every state reachable
// from `starts`. Throws when some reachable state cannot reach the
// absorbing set (the expectation would be infinite).
std::vector<double> absorption_times(const Adjacency& adj,
                                     const std::vector<char>& absorbing,
                                     const std::vector<int>& starts,
                                     const std::string& context) {
  const int n = static_cast<int>(adj.size());
  // Absorption ends the walk, so absorbing states are not expanded.
  std::vector<char> reachable = forward_reachable(adj, starts, &absorbing);

  Adjacency radj(static_cast<size_t>(n));
  for (int u = 0; u < n; ++u) {
    if (!reachable[static_cast<size_t>(u)] || absorbing[static_cast<size_t>(u)])
      continue;  // absorbing states do not move
    for (const auto& [v, p] : adj[static_cast<size_t>(u)])
      if (p > 0.0) radj[static_cast<size_t>(v)].push_back({u, p});
  }
  std::vector<int> abs_states;
  for (int u = 0; u < n; ++u)
    if (reachable[static_cast<size_t>(u)] && absorbing[static_cast<size_t>(u)])
      abs_states.push_back(u);
  std::vector<char> can_reach = forward_reachable(radj, abs_states);
  for (int u = 0; u < n; ++u)
    if (reachable[static_cast<size_t>(u)] && !can_reach[static_cast<size_t>(u)])
      throw AlgorithmError(context + ": target unreachable from state " +
                           std::to_string(u));

  // Unknowns: reachable transient states.
  std::vector<int> index_of(static_cast<size_t>(n), -1);
  std::vector<int> unknowns;
  for (int u = 0; u < n; ++u)
    if (reachable[static_cast<size_t>(u)] && !absorbing[static_cast<size_t>(u)]) {
      index_of[static_cast<size_t>(u)] = static_cast<int>(unknowns.size());
      unknowns.push_back(u);
    }
  const int q = static_cast<int>(unknowns.size());
  if (q > 4096)
    throw ValidationError(context + ": transient product space too large (" +
                          std::to_string(q) + " states)");

  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(q, q);
  for (int r = 0; r < q; ++r)
    for (const auto& [v, p] : adj[static_cast<size_t>(unknowns[static_cast<size_t>(r)])]) {
      const int c = index_of[static_cast<size_t>(v)];
      if (c >= 0) M(r, c) -= p;
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(q);
  Eigen::VectorXd h = q > 0 ? M.partialPivLu().solve(rhs).eval()
                            : Eigen::VectorXd();
  if (q > 0) {
    const double residual = (M * h - rhs).lpNorm<Eigen::Infinity>();
    if (!(residual < 1e-7 * (1.0 + h.lpNorm<Eigen::Infinity>())))
      throw AlgorithmError(context + ": singular absorption system");
  }

  std::vector<double> out(static_cast<size_t>(n),
                          std::numeric_limits<double>::quiet_NaN());
  for (int u = 0; u < n; ++u)
    if (reachable[static_cast<size_t>(u)])
      out[static_cast<size_t>(u)] =
          absorbing[static_cast<size_t>(u)]
              ? 0.0
              : h(index_of[static_cast<size_t>(u)]);
  return out;
}

Adjacency graph_adjacency(const StochasticGraph& g) {
  Adjacency adj(static_cast<size_t>(g.n()));
  for (Node i = 0; i < g.n(); ++i) {
    auto row = g.row(i);
    for (Node j = 0; j < g.n(); ++j)
      if (row[static_cast<size_t>(j)] > 0.0)
        adj[static_cast<size_t>(i)].push_back({j, row[static_cast<size_t>(j)]});
  }
  return adj;
}

void check_set(const NodeSet& S, int n, const char* who) {
  if (S.empty()) throw ValidationError(std::string(who) + ": empty node set");
  if (!S.members().empty() && S.members().back() >= n)
    throw ValidationError(std::string(who) + ": node out of range");
}

}  // namespace

std::optional<long> realize_stopping_time(const SamplePath& path,
                                          const StoppingTimeSpec& spec) {
  const auto& s = path.states;
  switch (spec.kind) {
    case StoppingTimeSpec::Kind::ReachNode:
      for (size_t t = 0; t < s.size(); ++t)
        if (s[t] == spec.node) return static_cast<long>(t);
      return std::nullopt;
    case StoppingTimeSpec::Kind::ReachThenReturn: {
      bool touched = false;
      for (size_t t = 1; t < s.size(); ++t) {
        touched = touched || s[t - 1] == spec.node;
        if (touched && s[t] == spec.origin) return static_cast<long>(t);
      }
      return std::nullopt;
    }
    case StoppingTimeSpec::Kind::Custom:
      for (size_t t = 0; t < s.size(); ++t)
        if (spec.predicate(std::span<const Node>(s.data(), t + 1)))
          return static_cast<long>(t);
      return std::nullopt;
  }
  return std::nullopt;
}

StoppingAggregate stopping_time_aggregate(
    const std::vector<SamplePath>& paths,
    const std::vector<StoppingTimeSpec>& specs, const NodeSet& chosen,
    AggregateMode mode) {
  if (chosen.empty())
    throw ValidationError("stopping_time_aggregate: empty chosen set");
  for (Node i : chosen)
    if (i >= static_cast<int>(specs.size()))
      throw ValidationError("stopping_time_aggregate: spec index out of range");
  StoppingAggregate agg;
  agg.per_path.reserve(paths.size());
  for (const auto& path : paths) {
    const long cap = static_cast<long>(path.states.size()) - 1;
    bool any_unresolved = false;
    long value = mode == AggregateMode::Max ? std::numeric_limits<long>::min()
                                            : std::numeric_limits<long>::max();
    for (Node i : chosen) {
      auto z = realize_stopping_time(path, specs[static_cast<size_t>(i)]);
      long zi;
      if (z) {
        zi = *z;
      } else {
        zi = cap;
        any_unresolved = true;
      }
      value = mode == AggregateMode::Max ? std::max(value, zi)
                                         : std::min(value, zi);
    }
    if (any_unresolved) ++agg.flagged;
    agg.per_path.push_back(value);
  }
  double sum = 0.0;
  for (long v : agg.per_path) sum += static_cast<double>(v);
  agg.mean = paths.empty() ? 0.0 : sum / static_cast<double>(paths.size());
  return agg;
}

std::vector<long> first_visit_times(const SamplePath& path, int n) {
  std::vector<long> fv(static_cast<size_t>(n), -1);
  for (size_t t = 0; t < path.states.size(); ++t) {
    const Node v = path.states[t];
    if (fv[static_cast<size_t>(v)] < 0) fv[static_cast<size_t>(v)] = static_cast<long>(t);
  }
  return fv;
}

std::optional<long> cover_time_on_path(const SamplePath& path,
                                       const NodeSet& S) {
  long worst = 0;
  for (Node s : S) {
    bool found = false;
    for (size_t t = 0; t < path.states.size(); ++t)
      if (path.states[t] == s) {
        worst = std::max(worst, static_cast<long>(t));
        found = true;
        break;
      }
    if (!found) return std::nullopt;
  }
  return worst;
}

double hitting_time_exact(const StochasticGraph& g, const NodeSet& S,
                          const Distribution& start) {
  check_set(S, g.n(), "hitting_time_exact");
  if (start.size() != g.n())
    throw ValidationError("hitting_time_exact: start distribution size");
  std::vector<int> support;
  for (Node i = 0; i < g.n(); ++i)
    if (start[i] > 0.0) support.push_back(i);
  if (support.empty())
    throw ValidationError("hitting_time_exact: empty start support");

  std::vector<char> absorbing(static_cast<size_t>(g.n()), 0);
  for (Node s : S) absorbing[static_cast<size_t>(s)] = 1;
  const auto h = absorption_times(graph_adjacency(g), absorbing, support,
                                  "hitting_time_exact: S unreachable from "
                                  "some supported start node");
  double value = 0.0;
  for (int i : support) value += start[i] * h[static_cast<size_t>(i)];
  return value;
}

std::vector<double> hitting_time_vector(const StochasticGraph& g,
                                        const NodeSet& S) {
  check_set(S, g.n(), "hitting_time_vector");
  std::vector<char> absorbing(static_cast<size_t>(g.n()), 0);
  for (Node s : S) absorbing[static_cast<size_t>(s)] = 1;
  std::vector<int> all(static_cast<size_t>(g.n()));
  for (int i = 0; i < g.n(); ++i) all[static_cast<size_t>(i)] = i;
  return absorption_times(graph_adjacency(g), absorbing, all,
                          "hitting_time_vector: S unreachable");
}

double commute_time_exact(const StochasticGraph& g, Node v, const NodeSet& S) {
  check_set(S, g.n(), "commute_time_exact");
  if (v < 0 || v >= g.n())
    throw ValidationError("commute_time_exact: v out of range");
  const int n = g.n();
  // Doubled chain: state (w, f) at index w + f*n, f = "S touched".
  // The flag updates on arrival, and (v, 1) is absorbing.
  const auto target = [n](Node w, int f) { return w + f * n; };
  Adjacency adj(static_cast<size_t>(2 * n));
  for (Node w = 0; w < n; ++w) {
    auto row = g.row(w);
    for (int f = 0; f <= 1; ++f) {
      if (w == v && f == 1) continue;  // absorbing
      for (Node w2 = 0; w2 < n; ++w2) {
        const double p = row[static_cast<size_t>(w2)];
        if (p <= 0.0) continue;
        const int f2 = (f == 1 || S.contains(w2)) ? 1 : 0;
        adj[static_cast<size_t>(target(w, f))].push_back({target(w2, f2), p});
      }
    }
  }
  std::vector<char> absorbing(static_cast<size_t>(2 * n), 0);
  absorbing[static_cast<size_t>(target(v, 1))] = 1;

  // One explicit first step, so a start with v in S is not read as an
  // already-completed commute.
  const int f0 = S.contains(v) ? 1 : 0;
  std::vector<int> starts;
  auto row = g.row(v);
  for (Node w2 = 0; w2 < n; ++w2) {
    if (row[static_cast<size_t>(w2)] <= 0.0) continue;
    const int f2 = (f0 == 1 || S.contains(w2)) ? 1 : 0;
    starts.push_back(target(w2, f2));
  }
  const auto h = absorption_times(adj, absorbing, starts,
                                  "commute_time_exact: no return path");
  double value = 1.0;
  for (Node w2 = 0; w2 < n; ++w2) {
    const double p = row[static_cast<size_t>(w2)];
    if (p <= 0.0) continue;
    const int f2 = (f0 == 1 || S.contains(w2)) ? 1 : 0;
    value += p * h[static_cast<size_t>(target(w2, f2))];
  }
  return value;
}

TimeEstimate cover_time_mc(const StochasticGraph& g, Node start,
                           const NodeSet& S, long n_samples, long cap,
                           std::uint64_t seed) {
  check_set(S, g.n(), "cover_time_mc");
  if (n_samples < 1) throw ValidationError("cover_time_mc: n_samples < 1");
  if (cap < 1) throw ValidationError("cover_time_mc: cap < 1");
  TimeEstimate est;
  est.samples = n_samples;
  double sum = 0.0, sum_sq = 0.0;
  for (long s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
    long remaining = S.size();
    std::vector<char> seen(static_cast<size_t>(g.n()), 0);
    Node cur = start;
    if (S.contains(cur)) --remaining;
    seen[static_cast<size_t>(cur)] = 1;
    long t = 0;
    while (remaining > 0 && t < cap) {
      const double u = rng.uniform();
      double acc = 0.0;
      Node next = g.n() - 1;
      auto row = g.row(cur);
      for (Node j = 0; j < g.n(); ++j) {
        acc += row[static_cast<size_t>(j)];
        if (u < acc) {
          next = j;
          break;
        }
      }
      ++t;
      cur = next;
      if (!seen[static_cast<size_t>(cur)]) {
        seen[static_cast<size_t>(cur)] = 1;
        if (S.contains(cur)) --remaining;
      }
    }
    if (remaining > 0) ++est.cap_hits;
    sum += static_cast<double>(t);
    sum_sq += static_cast<double>(t) * static_cast<double>(t);
  }
  est.mean = sum / static_cast<double>(n_samples);
  if (n_samples > 1) {
    const double var =
        std::max(0.0, (sum_sq - sum * sum / static_cast<double>(n_samples)) /
                          static_cast<double>(n_samples - 1));
    est.half_width = 1.96 * std::sqrt(var / static_cast<double>(n_samples));
  }
  est.flagged = est.cap_hits * 100 > n_samples;
  return est;
}

double cover_time_exact_small(const StochasticGraph& g, Node start,
                              const NodeSet& S) {
  check_set(S, g.n(), "cover_time_exact_small");
  if (S.size() > 15)
    throw ValidationError("cover_time_exact_small: |S| > 15");
  const int n = g.n();
  const int bits = S.size();
  const int full = (1 << bits) - 1;
  std::vector<int> bit_of(static_cast<size_t>(n), -1);
  for (int k = 0; k < bits; ++k)
    bit_of[static_cast<size_t>(S.members()[static_cast<size_t>(k)])] = k;

  const auto index = [&](Node w, int mask) { return w * (full + 1) + mask; };
  const int total = n * (full + 1);
  Adjacency adj(static_cast<size_t>(total));
  for (Node w = 0; w < n; ++w) {
    auto row = g.row(w);
    for (int mask = 0; mask <= full; ++mask) {
      if (mask == full) continue;  // absorbing layer
      for (Node w2 = 0; w2 < n; ++w2) {
        const double p = row[static_cast<size_t>(w2)];
        if (p <= 0.0) continue;
        int mask2 = mask;
        if (bit_of[static_cast<size_t>(w2)] >= 0)
          mask2 |= 1 << bit_of[static_cast<size_t>(w2)];
        adj[static_cast<size_t>(index(w, mask))].push_back(
            {index(w2, mask2), p});
      }
    }
  }
  std::vector<char> absorbing(static_cast<size_t>(total), 0);
  for (Node w = 0; w < n; ++w)
    absorbing[static_cast<size_t>(index(w, full))] = 1;

  int mask0 = 0;
  if (bit_of[static_cast<size_t>(start)] >= 0)
    mask0 |= 1 << bit_of[static_cast<size_t>(start)];
  const int s0 = index(start, mask0);
  if (mask0 == full) return 0.0;
  const auto h = absorption_times(adj, absorbing, {s0},
                                  "cover_time_exact_small: uncoverable set");
  return h[static_cast<size_t>(s0)];
}

double matthews_bound(const std::vector<double>& hit_floor) {
  if (hit_floor.empty())
    throw ValidationError("matthews_bound: empty floor vector");
  std::vector<double> sorted = hit_floor;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double best = 0.0;
  double harmonic = 0.0;  // c(k) accumulated as 1 + 1/2 + ... + 1/(k-1)
  for (size_t k = 1; k <= sorted.size(); ++k) {
    best = std::max(best, sorted[k - 1] * harmonic);
    harmonic += 1.0 / static_cast<double>(k);
  }
  return best;
}

std::vector<double> compute_hit_floor(const StochasticGraph& g) {
  std::vector<double> floor(static_cast<size_t>(g.n()), 0.0);
  for (Node b = 0; b < g.n(); ++b) {
    const auto h = hitting_time_vector(g, NodeSet{b});
    double mn = std::numeric_limits<double>::infinity();
    for (Node a = 0; a < g.n(); ++a)
      if (a != b) mn = std::min(mn, h[static_cast<size_t>(a)]);
    floor[static_cast<size_t>(b)] = mn;
  }
  return floor;
}

NodeSet minimize_matthews(const StochasticGraph& g, double psi,
                          MatthewsSweep sweep) {
  if (psi < 0) throw ValidationError("minimize_matthews: psi < 0");
  const auto floors = compute_hit_floor(g);
  std::vector<Node> order(static_cast<size_t>(g.n()));
  for (Node i = 0; i < g.n(); ++i) order[static_cast<size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(), [&](Node a, Node b) {
    return floors[static_cast<size_t>(a)] < floors[static_cast<size_t>(b)];
  });

  int best_k = 1;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> chosen_floors;
  double harmonic = 0.0;
  for (int k = 1; k <= g.n(); ++k) {
    chosen_floors.push_back(floors[static_cast<size_t>(order[static_cast<size_t>(k - 1)])]);
    double score;
    if (sweep == MatthewsSweep::FloorBound) {
      score = matthews_bound(chosen_floors) - psi * k;
    } else {
      // k-th smallest floor times the harmonic weight.
      score = chosen_floors.back() * harmonic - psi * k;
    }
    if (score < best_score - 1e-15) {
      best_score = score;
      best_k = k;
    }
    harmonic += 1.0 / static_cast<double>(k);
  }
  return NodeSet(std::vector<Node>(order.begin(), order.begin() + best_k));
}

double cover_threshold_prob(const StochasticGraph& g, Node start,
                            const NodeSet& S, long L, long n_samples,
                            std::uint64_t seed) {
  check_set(S, g.n(), "cover_threshold_prob");
  if (L < 0) throw ValidationError("cover_threshold_prob: L < 0");
  if (n_samples < 1) throw ValidationError("cover_threshold_prob: n_samples < 1");
  long above = 0;
  for (long s = 0; s < n_samples; ++s) {
    SamplePath path;
    if (L == 0) {
      path.states = {start};
    } else {
      // Streams keyed by sample index: the path set is shared across S.
      path = simulate_path(g, start, L, Rng::stream(seed, static_cast<std::uint64_t>(s)).raw());
    }
    if (!cover_time_on_path(path, S).has_value()) ++above;
  }
  return static_cast<double>(above) / static_cast<double>(n_samples);
}

}  // namespace walkopt
