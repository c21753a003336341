#pragma once

#include <limits>
#include <string>
#include <vector>

namespace walkopt {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus s);

// Row sense: '<' means a.x <= b, '>' means a.x >= b, '=' equality.
struct LpRow {
  std::vector<double> a;
  char sense = '<';
  double b = 0.0;
};

// Dense LP in the form: minimize c.x subject to rows and box bounds.
// Bounds default to free; use set_bounds to pin them.
struct LpProblem {
  int num_vars = 0;
  std::vector<double> c;
  std::vector<LpRow> rows;
  std::vector<double> lower, upper;

  explicit LpProblem(int n)
      : num_vars(n),
        c(static_cast<size_t>(n), 0.0),
        lower(static_cast<size_t>(n),
              -std::numeric_limits<double>::infinity()),
        upper(static_cast<size_t>(n),
              std::numeric_limits<double>::infinity()) {}

  void set_bounds(int j, double lo, double hi) {
    lower[static_cast<size_t>(j)] = lo;
    upper[static_cast<size_t>(j)] = hi;
  }
  void add_row(std::vector<double> a, char sense, double b) {
    rows.push_back(LpRow{std::move(a), sense, b});
  }
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double value = 0.0;
};

// Two-phase dense primal simplex. Deterministic given the input ordering;
// Bland's rule engages after a pivot budget to guarantee termination.
LpResult solve_lp(const LpProblem& p, long max_iters = 0);

}  // namespace walkopt
