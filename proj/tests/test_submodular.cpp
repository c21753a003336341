#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "walkopt/submodular.hpp"
#include "walkopt/walk_times.hpp"

using namespace walkopt;

namespace {

SetFunction modular(std::vector<double> w) {
  return [w = std::move(w)](const NodeSet& S) {
    double v = 0.0;
    for (Node i : S) v += w[static_cast<size_t>(i)];
    return v;
  };
}

// Coverage of ground elements by named subsets: f(S) = |union of sets|.
SetFunction coverage(std::vector<NodeSet> sets) {
  return [sets = std::move(sets)](const NodeSet& S) {
    NodeSet covered;
    for (Node i : S) covered = covered.unite(sets[static_cast<size_t>(i)]);
    return static_cast<double>(covered.size());
  };
}

// A random coverage instance: monotone submodular by construction.
SetFunction random_submodular(int ground, int universe, std::uint64_t seed,
                              std::vector<NodeSet>* out_sets = nullptr) {
  Rng rng(seed);
  std::vector<NodeSet> sets;
  for (int i = 0; i < ground; ++i) {
    std::vector<Node> members;
    for (int u = 0; u < universe; ++u)
      if (rng.uniform() < 0.35) members.push_back(u);
    sets.push_back(NodeSet(members));
  }
  if (out_sets) *out_sets = sets;
  return coverage(sets);
}

}  // namespace

TEST_CASE("matroid independence") {
  const auto u2 = Matroid::uniform(2);
  CHECK(is_independent(u2, NodeSet{}));
  CHECK(is_independent(u2, NodeSet{3, 9}));
  CHECK(!is_independent(u2, NodeSet{1, 2, 3}));

  const auto part = Matroid::partition({NodeSet{0, 1}, NodeSet{2, 3}});
  CHECK(is_independent(part, NodeSet{}));
  CHECK(is_independent(part, NodeSet{0, 2}));
  CHECK(!is_independent(part, NodeSet{0, 1}));
  CHECK(!is_independent(part, NodeSet{4}));  // outside every block

  const auto uu = Matroid::union_of(Matroid::uniform(1), Matroid::uniform(1));
  CHECK(is_independent(uu, NodeSet{5, 6}));
  CHECK(!is_independent(uu, NodeSet{5, 6, 7}));

  CHECK_THROWS_AS(Matroid::partition({NodeSet{0, 1}, NodeSet{1, 2}}),
                  ValidationError);
}

TEST_CASE("greedy max cardinality on modular weights is exact") {
  const auto report =
      greedy_max_cardinality(modular({3.0, 1.0, 2.0}), NodeSet::full(3), 2);
  CHECK(report.chosen == NodeSet{0, 2});
  CHECK(report.trace.size() == 2);
  CHECK(report.trace[0].first == 0);
  CHECK(report.trace[0].second == doctest::Approx(3.0));
  CHECK(report.evaluations >= 2);
  CHECK(report.bound == doctest::Approx(1.0 - std::exp(-1.0)));
}

TEST_CASE("greedy first step maximizes coverage") {
  const auto f = coverage({NodeSet{0, 1}, NodeSet{1, 2}, NodeSet{2}});
  const auto report = greedy_max_cardinality(f, NodeSet::full(3), 1);
  REQUIRE(report.chosen.size() == 1);
  // Either two-element coverer is acceptable; ties go to the lowest index.
  CHECK(report.chosen.members()[0] == 0);
}

TEST_CASE("greedy achieves the 1-1/e bound against brute force") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto f = random_submodular(8, 10, seed);
    const auto report = greedy_max_cardinality(f, NodeSet::full(8), 3);
    double best = 0.0;
    double max_single = 0.0;
    for (const auto& S : oracles::subsets_up_to(8, 3))
      best = std::max(best, f(S));
    for (Node v = 0; v < 8; ++v) max_single = std::max(max_single, f(NodeSet{v}));
    CHECK(f(report.chosen) >= (1.0 - std::exp(-1.0)) * best - 1e-9);
  }
}

TEST_CASE("lazy greedy matches eager greedy") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto f = random_submodular(9, 12, seed + 100);
    GreedyOptions lazy;
    lazy.lazy = true;
    const auto eager = greedy_max_cardinality(f, NodeSet::full(9), 4);
    const auto lazy_report = greedy_max_cardinality(f, NodeSet::full(9), 4, lazy);
    CHECK(eager.chosen == lazy_report.chosen);
    CHECK(lazy_report.evaluations <= eager.evaluations);
  }
}

TEST_CASE("greedy min cover on classic set cover") {
  std::vector<NodeSet> sets = {NodeSet{0, 1, 2}, NodeSet{2, 3}, NodeSet{3, 4},
                               NodeSet{0, 4}};
  const auto cov = coverage(sets);
  SetFunction uncovered = [&](const NodeSet& S) { return 5.0 - cov(S); };
  const auto report = greedy_min_cover(uncovered, NodeSet::full(4), 0.0);
  CHECK(uncovered(report.chosen) == doctest::Approx(0.0));
  CHECK(report.bound >= 1.0);

  // Already-satisfied target returns the empty set with only the
  // termination checks spent.
  const auto trivial = greedy_min_cover(uncovered, NodeSet::full(4), 5.0);
  CHECK(trivial.chosen.empty());
  CHECK(trivial.trace.empty());
  CHECK(trivial.evaluations <= 3);

  SetFunction stuck = [](const NodeSet&) { return 1.0; };
  CHECK_THROWS_AS(greedy_min_cover(stuck, NodeSet::full(4), 0.0),
                  AlgorithmError);
}

TEST_CASE("greedy min cover ratio bound against brute force") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::vector<NodeSet> sets;
    const auto cov = random_submodular(8, 12, seed + 55, &sets);
    NodeSet universe;
    for (const auto& s : sets) universe = universe.unite(s);
    const double total = static_cast<double>(universe.size());
    // Nonincreasing supermodular remainder.
    SetFunction f = [&](const NodeSet& S) { return total - cov(S); };
    const auto report = greedy_min_cover(f, NodeSet::full(8), 0.0);
    CHECK(f(report.chosen) == doctest::Approx(0.0));

    int best_size = 8;
    for (const auto& S : oracles::subsets_up_to(8, 8))
      if (f(S) <= 0.0) best_size = std::min(best_size, S.size());
    double min_drop = std::numeric_limits<double>::infinity();
    for (Node v : report.chosen)
      min_drop = std::min(min_drop, f(report.chosen.without(v)));
    const double wolsey =
        min_drop > 0.0 ? 1.0 + std::log(f(NodeSet{}) / min_drop)
                       : std::numeric_limits<double>::infinity();
    CHECK(static_cast<double>(report.chosen.size()) <=
          wolsey * static_cast<double>(best_size) + 1e-9);
  }
}

TEST_CASE("greedy over matroids") {
  // Uniform rank behaves exactly like plain cardinality greedy.
  const auto f = modular({3.0, 1.0, 2.0, 5.0});
  const auto uni = greedy_matroid(f, Matroid::uniform(2), NodeSet::full(4));
  const auto card = greedy_max_cardinality(f, NodeSet::full(4), 2);
  CHECK(uni.chosen == card.chosen);

  // Partition blocks force one pick per block.
  const auto part = greedy_matroid(
      modular({5.0, 1.0, 4.0, 2.0}),
      Matroid::partition({NodeSet{0, 1}, NodeSet{2, 3}}), NodeSet::full(4));
  CHECK(part.chosen == NodeSet{0, 2});

  // Modular objective on a union matroid matches exhaustive search.
  const auto m = Matroid::union_of(
      Matroid::partition({NodeSet{0, 1}, NodeSet{2, 3}}), Matroid::uniform(1));
  const auto g = modular({2.0, 7.0, 3.0, 4.0});
  const auto greedy = greedy_matroid(g, m, NodeSet::full(4));
  double best = 0.0;
  for (const auto& S : oracles::subsets_up_to(4, 4))
    if (is_independent(m, S)) best = std::max(best, g(S));
  CHECK(g(greedy.chosen) == doctest::Approx(best));
}

TEST_CASE("diminishing returns checker") {
  const auto none_mod = check_diminishing_returns(
      modular({1.0, 2.0, 3.0, 4.0, 5.0}), NodeSet::full(5), 200,
      DrDirection::Submodular, 7);
  CHECK(none_mod.empty());
  const auto none_mod2 = check_diminishing_returns(
      modular({1.0, 2.0, 3.0, 4.0, 5.0}), NodeSet::full(5), 200,
      DrDirection::Supermodular, 7);
  CHECK(none_mod2.empty());

  SetFunction square = [](const NodeSet& S) {
    return static_cast<double>(S.size()) * static_cast<double>(S.size());
  };
  CHECK(check_diminishing_returns(square, NodeSet::full(6), 300,
                                  DrDirection::Supermodular, 7)
            .empty());
  CHECK(!check_diminishing_returns(square, NodeSet::full(6), 300,
                                   DrDirection::Submodular, 7)
             .empty());
}

TEST_CASE("exact hitting time passes the supermodular sweep") {
  const auto g = oracles::random_ergodic_graph(8, 4);
  const auto start = Distribution::uniform(8);
  SetFunction hit = [&](const NodeSet& S) {
    if (S.empty()) return 1e6;  // conventional large value off the lattice
    return hitting_time_exact(g, S, start);
  };
  // Chains sampled with nonempty smalls only: restrict ground away from
  // the empty-set sentinel by checking violations that involve it.
  const auto violations = check_diminishing_returns(
      hit, NodeSet::full(8), 150, DrDirection::Supermodular, 11);
  int real = 0;
  for (const auto& v : violations)
    if (!v.small.empty()) ++real;
  CHECK(real == 0);
}

TEST_CASE("greedy reports are deterministic") {
  const auto f = random_submodular(7, 9, 42);
  const auto a = greedy_max_cardinality(f, NodeSet::full(7), 3);
  const auto b = greedy_max_cardinality(f, NodeSet::full(7), 3);
  CHECK(a.chosen == b.chosen);
  CHECK(a.trace == b.trace);
  CHECK(a.evaluations == b.evaluations);
}
