#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "oracles.hpp"
#include "walkopt/graph.hpp"

using namespace walkopt;

namespace {
StochasticGraph swap_chain() {
  return StochasticGraph::from_rows({{0.0, 1.0}, {1.0, 0.0}});
}
StochasticGraph k3_uniform() {
  return StochasticGraph::from_rows(
      {{0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}, {0.5, 0.5, 0.0}});
}
}  // namespace

TEST_CASE("stochastic graph validation") {
  CHECK_THROWS_AS(StochasticGraph::from_rows({{0.5, 0.4}, {0.5, 0.5}}),
                  ValidationError);
  CHECK_THROWS_AS(StochasticGraph::from_rows({{1.2, -0.2}, {0.5, 0.5}}),
                  ValidationError);
  CHECK_THROWS_AS(StochasticGraph(2, {1.0, 0.0, 1.0}), ValidationError);
}

TEST_CASE("simulate_path on deterministic chains") {
  const auto path = simulate_path(swap_chain(), 0, 3, 42);
  CHECK(path.states == std::vector<Node>{0, 1, 0, 1});

  const auto absorbing = StochasticGraph::from_rows({{1.0, 0.0}, {0.5, 0.5}});
  const auto stay = simulate_path(absorbing, 0, 5, 7);
  CHECK(stay.states == std::vector<Node>(6, 0));

  CHECK_THROWS_AS(simulate_path(swap_chain(), 5, 3, 1), ValidationError);
}

TEST_CASE("simulate_path is reproducible bit-exactly") {
  const auto a = simulate_path(k3_uniform(), 0, 200, 99);
  const auto b = simulate_path(k3_uniform(), 0, 200, 99);
  CHECK(a.states == b.states);
  const auto c = simulate_path(k3_uniform(), 0, 200, 100);
  CHECK(a.states != c.states);
}

TEST_CASE("stationary distribution on symmetric chains") {
  const auto flat = StochasticGraph::from_rows({{0.5, 0.5}, {0.5, 0.5}});
  const auto pi = stationary_distribution(flat, 1e-13);
  CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-10));

  const auto pi3 = stationary_distribution(k3_uniform(), 1e-13);
  for (int i = 0; i < 3; ++i)
    CHECK(pi3[i] == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("stationary distribution matches the linear-solve oracle") {
  const auto g = StochasticGraph::from_rows({{0.9, 0.1}, {0.5, 0.5}});
  const auto pi = stationary_distribution(g, 1e-14);
  // Hand solve: 0.1 pi0 = 0.5 pi1 -> pi = (5/6, 1/6).
  CHECK(pi[0] == doctest::Approx(5.0 / 6).epsilon(1e-9));
  CHECK(pi[1] == doctest::Approx(1.0 / 6).epsilon(1e-9));
  const auto solved = oracles::stationary_solve(g);
  CHECK(pi[0] == doctest::Approx(solved[0]).epsilon(1e-9));

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto rg = oracles::random_ergodic_graph(6, seed);
    const auto p = stationary_distribution(rg, 1e-13);
    const auto q = oracles::stationary_solve(rg);
    for (int i = 0; i < 6; ++i)
      CHECK(p[i] == doctest::Approx(q[static_cast<size_t>(i)]).epsilon(1e-8));
  }
}

TEST_CASE("stationary distribution rejects periodic chains") {
  CHECK_THROWS_AS(stationary_distribution(swap_chain(), 1e-12, 2000),
                  AlgorithmError);
}

TEST_CASE("erdos-renyi generator") {
  const auto complete = gen_erdos_renyi(3, 1.0, 5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(complete.at(i, j) == doctest::Approx(i == j ? 0.0 : 0.5));

  const auto a = gen_erdos_renyi(50, 0.2, 11);
  const auto b = gen_erdos_renyi(50, 0.2, 11);
  for (int i = 0; i < 50; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 50; ++j) {
      sum += a.at(i, j);
      CHECK(a.at(i, j) == b.at(i, j));
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Sparse enough that isolated rows appear and get the self-loop repair.
  const auto sparse = gen_erdos_renyi(30, 0.02, 3);
  for (int i = 0; i < 30; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 30; ++j) sum += sparse.at(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("long-run visit frequencies approach the stationary law") {
  // Uniform walk on K5 mixes in one step, so the iid standard error is a
  // conservative yardstick.
  std::vector<std::vector<double>> rows(5, std::vector<double>(5, 0.25));
  for (int i = 0; i < 5; ++i) rows[static_cast<size_t>(i)][static_cast<size_t>(i)] = 0.0;
  const auto g = StochasticGraph::from_rows(rows);
  const long T = 200000;
  const auto path = simulate_path(g, 0, T, 2024);
  std::vector<long> counts(5, 0);
  for (Node v : path.states) ++counts[static_cast<size_t>(v)];
  const double se = std::sqrt(0.2 * 0.8 / static_cast<double>(T + 1));
  for (int i = 0; i < 5; ++i) {
    const double freq = static_cast<double>(counts[static_cast<size_t>(i)]) /
                        static_cast<double>(T + 1);
    CHECK(std::abs(freq - 0.2) < 3.0 * se + 1e-4);
  }
}

TEST_CASE("graph CSV round trip and edge list loading") {
  const auto g = gen_erdos_renyi(7, 0.5, 21);
  const std::string path = "graph_roundtrip.csv";
  save_graph_csv(g, path);
  const auto loaded = load_graph_csv(path);
  REQUIRE(loaded.n() == g.n());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      CHECK(loaded.at(i, j) == doctest::Approx(g.at(i, j)).epsilon(1e-14));
  std::remove(path.c_str());

  {
    std::ofstream out("edges.csv");
    out << "i,j,weight\n0,1,2\n1,0,1\n1,2,1\n2,0,3\n";
  }
  const auto e = load_graph_csv("edges.csv");
  REQUIRE(e.n() == 3);
  CHECK(e.at(0, 1) == doctest::Approx(1.0));  // normalized
  CHECK(e.at(1, 0) == doctest::Approx(0.5));
  CHECK(e.at(1, 2) == doctest::Approx(0.5));
  CHECK(e.at(2, 2) == doctest::Approx(0.0));
  std::remove("edges.csv");

  {
    std::ofstream out("bad.csv");
    out << "1,0\n0.5\n";
  }
  CHECK_THROWS_AS(load_graph_csv("bad.csv"), ValidationError);
  std::remove("bad.csv");
  CHECK_THROWS_AS(load_graph_csv("missing_file.csv"), ValidationError);
}
