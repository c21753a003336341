#include <doctest.h>

#include <cmath>
#include <functional>

#include "walkopt/common.hpp"
#include "walkopt/lp.hpp"

using namespace walkopt;

namespace {

// Brute-force oracle for tiny LPs: enumerate candidate vertices from all
// combinations of active constraints (rows and bound faces), keep the
// feasible ones, and take the best objective.
struct DenseLp {
  int n;
  std::vector<double> c;
  std::vector<std::vector<double>> rows;  // a.x <= b
  std::vector<double> rhs;
  std::vector<double> lo, hi;
};

bool feasible(const DenseLp& lp, const std::vector<double>& x) {
  for (int j = 0; j < lp.n; ++j)
    if (x[static_cast<size_t>(j)] < lp.lo[static_cast<size_t>(j)] - 1e-9 ||
        x[static_cast<size_t>(j)] > lp.hi[static_cast<size_t>(j)] + 1e-9)
      return false;
  for (size_t r = 0; r < lp.rows.size(); ++r) {
    double v = 0.0;
    for (int j = 0; j < lp.n; ++j)
      v += lp.rows[r][static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
    if (v > lp.rhs[r] + 1e-9) return false;
  }
  return true;
}

// Solve an n x n linear system by elimination; returns false if singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<size_t>(r)][static_cast<size_t>(col)]) >
          std::abs(a[static_cast<size_t>(piv)][static_cast<size_t>(col)]))
        piv = r;
    if (std::abs(a[static_cast<size_t>(piv)][static_cast<size_t>(col)]) < 1e-11)
      return false;
    std::swap(a[static_cast<size_t>(col)], a[static_cast<size_t>(piv)]);
    std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[static_cast<size_t>(r)][static_cast<size_t>(col)] /
                       a[static_cast<size_t>(col)][static_cast<size_t>(col)];
      for (int cc = col; cc < n; ++cc)
        a[static_cast<size_t>(r)][static_cast<size_t>(cc)] -=
            f * a[static_cast<size_t>(col)][static_cast<size_t>(cc)];
      b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
    }
  }
  x.assign(static_cast<size_t>(n), 0.0);
  for (int r = 0; r < n; ++r)
    x[static_cast<size_t>(r)] = b[static_cast<size_t>(r)] /
                                a[static_cast<size_t>(r)][static_cast<size_t>(r)];
  return true;
}

double vertex_enum_min(const DenseLp& lp, bool& any_feasible) {
  // Candidate faces: every row plus every bound as an equality.
  std::vector<std::vector<double>> faces = lp.rows;
  std::vector<double> face_rhs = lp.rhs;
  for (int j = 0; j < lp.n; ++j) {
    std::vector<double> e(static_cast<size_t>(lp.n), 0.0);
    e[static_cast<size_t>(j)] = 1.0;
    faces.push_back(e);
    face_rhs.push_back(lp.lo[static_cast<size_t>(j)]);
    faces.push_back(e);
    face_rhs.push_back(lp.hi[static_cast<size_t>(j)]);
  }
  const int f = static_cast<int>(faces.size());
  double best = std::numeric_limits<double>::infinity();
  any_feasible = false;
  std::vector<int> pick(static_cast<size_t>(lp.n), 0);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == lp.n) {
      std::vector<std::vector<double>> a;
      std::vector<double> b;
      for (int d = 0; d < lp.n; ++d) {
        a.push_back(faces[static_cast<size_t>(pick[static_cast<size_t>(d)])]);
        b.push_back(face_rhs[static_cast<size_t>(pick[static_cast<size_t>(d)])]);
      }
      std::vector<double> x;
      if (!solve_square(a, b, x)) return;
      if (!feasible(lp, x)) return;
      any_feasible = true;
      double v = 0.0;
      for (int j = 0; j < lp.n; ++j)
        v += lp.c[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      best = std::min(best, v);
      return;
    }
    for (int i = start; i < f; ++i) {
      pick[static_cast<size_t>(depth)] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("one-variable basics") {
  LpProblem p(1);  // default bounds: free variable
  p.c = {1.0};
  p.add_row({1.0}, '>', 3.0);
  p.add_row({1.0}, '<', 10.0);
  const auto res = solve_lp(p);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.value == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(res.x[0] == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("infeasible and unbounded are distinguished") {
  {
    LpProblem p(1);
    p.c = {1.0};
    p.add_row({1.0}, '<', 0.0);
    p.add_row({1.0}, '>', 1.0);
    CHECK(solve_lp(p).status == LpStatus::Infeasible);
  }
  {
    LpProblem p(1);
    p.c = {-1.0};
    p.set_bounds(0, 0.0, std::numeric_limits<double>::infinity());
    CHECK(solve_lp(p).status == LpStatus::Unbounded);
  }
}

TEST_CASE("equality rows and free variables") {
  // min x + y s.t. x + y = 2, x - y >= 0, free vars.
  LpProblem p(2);
  p.c = {1.0, 1.0};
  p.add_row({1.0, 1.0}, '=', 2.0);
  p.add_row({1.0, -1.0}, '>', 0.0);
  const auto res = solve_lp(p);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("degenerate rows do not break the solver") {
  LpProblem p(2);
  p.c = {1.0, 0.0};
  p.set_bounds(0, 0.0, 1.0);
  p.set_bounds(1, 0.0, 1.0);
  p.add_row({0.0, 0.0}, '<', 0.0);   // identically-zero row
  p.add_row({1.0, 1.0}, '<', 2.0);   // redundant
  p.add_row({1.0, 1.0}, '<', 2.0);   // duplicated
  const auto res = solve_lp(p);
  REQUIRE(res.status == LpStatus::Optimal);
  CHECK(res.value == doctest::Approx(0.0));
}

TEST_CASE("random boxed LPs match the vertex-enumeration oracle") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 24; ++seed) {
    Rng rng(seed * 977 + 5);
    const int n = 2 + static_cast<int>(seed % 2);
    DenseLp lp;
    lp.n = n;
    lp.c.resize(static_cast<size_t>(n));
    lp.lo.assign(static_cast<size_t>(n), -1.0);
    lp.hi.assign(static_cast<size_t>(n), 2.0);
    for (auto& v : lp.c) v = rng.uniform(-1.0, 1.0);
    const int m = 3;
    for (int r = 0; r < m; ++r) {
      std::vector<double> row(static_cast<size_t>(n));
      for (auto& v : row) v = rng.uniform(-1.0, 1.0);
      lp.rows.push_back(row);
      lp.rhs.push_back(rng.uniform(-0.5, 1.0));
    }
    bool any = false;
    const double oracle = vertex_enum_min(lp, any);

    LpProblem p(n);
    p.c = lp.c;
    for (int j = 0; j < n; ++j) p.set_bounds(j, lp.lo[static_cast<size_t>(j)], lp.hi[static_cast<size_t>(j)]);
    for (size_t r = 0; r < lp.rows.size(); ++r)
      p.add_row(lp.rows[r], '<', lp.rhs[r]);
    const auto res = solve_lp(p);
    if (!any) {
      CHECK(res.status == LpStatus::Infeasible);
    } else {
      REQUIRE(res.status == LpStatus::Optimal);
      CHECK(res.value ==
            doctest::Approx(oracle).epsilon(1e-8).scale(1.0 + std::abs(oracle)));
      ++checked;
    }
  }
  CHECK(checked >= 15);  // the instances are mostly feasible by design
}

TEST_CASE("solver is deterministic for a fixed input ordering") {
  LpProblem p(3);
  p.c = {1.0, 2.0, -1.0};
  for (int j = 0; j < 3; ++j) p.set_bounds(j, 0.0, 5.0);
  p.add_row({1.0, 1.0, 1.0}, '<', 6.0);
  p.add_row({1.0, -1.0, 2.0}, '>', 1.0);
  const auto a = solve_lp(p);
  const auto b = solve_lp(p);
  REQUIRE(a.status == LpStatus::Optimal);
  CHECK(a.value == b.value);
  CHECK(a.x == b.x);
}
