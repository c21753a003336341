#include "walkopt/lp.hpp"

#include <algorithm>
#include <cmath>

#include "walkopt/common.hpp"

namespace walkopt {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal:
      return "optimal";
    case LpStatus::Infeasible:
      return "infeasible";
    case LpStatus::Unbounded:
      return "unbounded";
    case LpStatus::IterationLimit:
      return "iteration-limit";
  }
  return "?";
}

namespace {

constexpr double kEps = 1e-9;      // reduced-cost threshold
constexpr double kPivTol = 1e-7;   // minimum acceptable pivot magnitude
constexpr double kFeasTol = 1e-7;

inline bool finite(double v) { return std::isfinite(v); }

// Standard-form workspace: minimize cs.y with As.y = bs, y >= 0.
struct Standard {
  int ny = 0;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<int> slack_of_row;  // column of the row's own +1 slack, or -1

  // x_j = shift + sign * y_col (+ negative part for free variables).
  struct VarMap {
    double shift = 0.0;
    double sign = 1.0;
    int col = -1;
    int neg_col = -1;
  };
  std::vector<VarMap> vars;

  int new_col(double cost) {
    c.push_back(cost);
    for (auto& row : A) row.push_back(0.0);
    return ny++;
  }
};

Standard build_standard(const LpProblem& p) {
  Standard s;
  s.vars.resize(static_cast<size_t>(p.num_vars));

  for (int j = 0; j < p.num_vars; ++j) {
    const double lo = p.lower[static_cast<size_t>(j)];
    const double hi = p.upper[static_cast<size_t>(j)];
    auto& vm = s.vars[static_cast<size_t>(j)];
    if (finite(lo)) {
      vm.shift = lo;
      vm.sign = 1.0;
      vm.col = s.ny++;
    } else if (finite(hi)) {
      vm.shift = hi;
      vm.sign = -1.0;
      vm.col = s.ny++;
    } else {
      vm.col = s.ny++;
      vm.neg_col = s.ny++;
    }
  }
  s.c.assign(static_cast<size_t>(s.ny), 0.0);
  for (int j = 0; j < p.num_vars; ++j) {
    const auto& vm = s.vars[static_cast<size_t>(j)];
    const double cj = p.c[static_cast<size_t>(j)];
    s.c[static_cast<size_t>(vm.col)] += vm.sign * cj;
    if (vm.neg_col >= 0) s.c[static_cast<size_t>(vm.neg_col)] -= cj;
  }

  auto expand_row = [&](const std::vector<double>& a, double rhs) {
    std::vector<double> row(static_cast<size_t>(s.ny), 0.0);
    double b = rhs;
    for (int j = 0; j < p.num_vars; ++j) {
      const double aj = a[static_cast<size_t>(j)];
      if (aj == 0.0) continue;
      const auto& vm = s.vars[static_cast<size_t>(j)];
      row[static_cast<size_t>(vm.col)] += vm.sign * aj;
      if (vm.neg_col >= 0) row[static_cast<size_t>(vm.neg_col)] -= aj;
      b -= aj * vm.shift;
    }
    s.A.push_back(std::move(row));
    s.b.push_back(b);
  };

  for (const auto& r : p.rows) {
    if (static_cast<int>(r.a.size()) != p.num_vars)
      throw ValidationError("solve_lp: row length mismatch");
    expand_row(r.a, r.b);
    if (r.sense == '<') {
      const int sc = s.new_col(0.0);
      s.A.back()[static_cast<size_t>(sc)] = 1.0;
      s.slack_of_row.push_back(sc);
    } else if (r.sense == '>') {
      const int sc = s.new_col(0.0);
      s.A.back()[static_cast<size_t>(sc)] = -1.0;
      s.slack_of_row.push_back(-1);  // surplus cannot start basic
    } else if (r.sense == '=') {
      s.slack_of_row.push_back(-1);
    } else {
      throw ValidationError("solve_lp: unknown row sense");
    }
  }

  // Range rows for two-sided finite bounds: y_col <= hi - lo.
  for (int j = 0; j < p.num_vars; ++j) {
    const double lo = p.lower[static_cast<size_t>(j)];
    const double hi = p.upper[static_cast<size_t>(j)];
    if (finite(lo) && finite(hi)) {
      std::vector<double> row(static_cast<size_t>(s.ny), 0.0);
      row[static_cast<size_t>(s.vars[static_cast<size_t>(j)].col)] = 1.0;
      const int sc = s.new_col(0.0);
      row.resize(static_cast<size_t>(s.ny), 0.0);
      row[static_cast<size_t>(sc)] = 1.0;
      s.A.push_back(std::move(row));
      s.b.push_back(hi - lo);
      s.slack_of_row.push_back(sc);
    }
  }

  for (auto& row : s.A) row.resize(static_cast<size_t>(s.ny), 0.0);
  s.c.resize(static_cast<size_t>(s.ny), 0.0);
  return s;
}

class Simplex {
 public:
  Simplex(Standard st, long max_iters, bool conservative)
      : st_(std::move(st)), m_(static_cast<int>(st_.A.size())),
        max_iters_(max_iters), conservative_(conservative) {
    for (int r = 0; r < m_; ++r) {
      double mx = 0.0;
      for (double v : st_.A[static_cast<size_t>(r)])
        mx = std::max(mx, std::abs(v));
      if (mx > 0.0) {
        for (auto& v : st_.A[static_cast<size_t>(r)]) v /= mx;
        st_.b[static_cast<size_t>(r)] /= mx;
      }
      if (st_.b[static_cast<size_t>(r)] < 0.0) {
        for (auto& v : st_.A[static_cast<size_t>(r)]) v = -v;
        st_.b[static_cast<size_t>(r)] = -st_.b[static_cast<size_t>(r)];
        // A flipped row's +1 slack became -1 and cannot start basic.
        if (r < static_cast<int>(st_.slack_of_row.size()))
          st_.slack_of_row[static_cast<size_t>(r)] = -1;
      }
    }
    n_struct_ = st_.ny;
    first_artificial_ = n_struct_;
    ncols_ = n_struct_ + m_;
    tableau_.assign(static_cast<size_t>(m_),
                    std::vector<double>(static_cast<size_t>(ncols_), 0.0));
    rhs_ = st_.b;
    basis_.resize(static_cast<size_t>(m_));
    in_basis_.assign(static_cast<size_t>(ncols_), 0);
    artificial_rows_ = 0;
    for (int r = 0; r < m_; ++r) {
      for (int j = 0; j < n_struct_; ++j)
        tableau_[static_cast<size_t>(r)][static_cast<size_t>(j)] =
            st_.A[static_cast<size_t>(r)][static_cast<size_t>(j)];
      // Start on the row's own slack where possible so that phase 1 only
      // prices the genuinely hard rows.
      const int slack = r < static_cast<int>(st_.slack_of_row.size())
                            ? st_.slack_of_row[static_cast<size_t>(r)]
                            : -1;
      if (slack >= 0) {
        basis_[static_cast<size_t>(r)] = slack;
        in_basis_[static_cast<size_t>(slack)] = 1;
      } else {
        tableau_[static_cast<size_t>(r)]
                [static_cast<size_t>(first_artificial_ + r)] = 1.0;
        basis_[static_cast<size_t>(r)] = first_artificial_ + r;
        in_basis_[static_cast<size_t>(first_artificial_ + r)] = 1;
        ++artificial_rows_;
      }
    }
    if (max_iters_ <= 0) max_iters_ = 400L * (m_ + ncols_ + 10);
  }

  LpStatus run() {
    if (artificial_rows_ > 0) {
      std::vector<double> cost1(static_cast<size_t>(ncols_), 0.0);
      for (int r = 0; r < m_; ++r)
        if (basis_[static_cast<size_t>(r)] >= first_artificial_)
          cost1[static_cast<size_t>(basis_[static_cast<size_t>(r)])] = 1.0;
      LpStatus s1 = optimize(cost1, /*phase1=*/true);
      if (s1 == LpStatus::IterationLimit) return s1;
      double artificial_mass = 0.0, scale = 1.0;
      for (int r = 0; r < m_; ++r) {
        scale = std::max(scale, std::abs(rhs_[static_cast<size_t>(r)]));
        if (basis_[static_cast<size_t>(r)] >= first_artificial_)
          artificial_mass += std::abs(rhs_[static_cast<size_t>(r)]);
      }
      if (artificial_mass > kFeasTol * scale) return LpStatus::Infeasible;
      expel_artificials();
    }
    std::vector<double> cost2(static_cast<size_t>(ncols_), 0.0);
    for (int j = 0; j < n_struct_; ++j)
      cost2[static_cast<size_t>(j)] = st_.c[static_cast<size_t>(j)];
    return optimize(cost2, /*phase1=*/false);
  }

  std::vector<double> solution_y() const {
    std::vector<double> y(static_cast<size_t>(n_struct_), 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[static_cast<size_t>(r)] < n_struct_)
        y[static_cast<size_t>(basis_[static_cast<size_t>(r)])] =
            rhs_[static_cast<size_t>(r)];
    return y;
  }

  const Standard& standard() const { return st_; }

 private:
  void load_costs(const std::vector<double>& cost) {
    d_ = cost;
    objective_ = 0.0;
    for (int r = 0; r < m_; ++r) {
      const double cb =
          cost[static_cast<size_t>(basis_[static_cast<size_t>(r)])];
      objective_ += cb * rhs_[static_cast<size_t>(r)];
      if (cb == 0.0) continue;
      const auto& row = tableau_[static_cast<size_t>(r)];
      for (int j = 0; j < ncols_; ++j)
        d_[static_cast<size_t>(j)] -= cb * row[static_cast<size_t>(j)];
    }
  }

  LpStatus optimize(const std::vector<double>& cost, bool phase1) {
    load_costs(cost);
    const int scan_cols = phase1 ? ncols_ : first_artificial_;
    const long bland_after = conservative_ ? 0 : 8L * (m_ + ncols_);
    for (long iter = 0; iter < max_iters_; ++iter) {
      if (iter > 0 && iter % 128 == 0) load_costs(cost);  // drift control
      int enter = -1;
      double best = -kEps;
      const bool bland = iter > bland_after;
      for (int j = 0; j < scan_cols; ++j) {
        if (in_basis_[static_cast<size_t>(j)]) continue;
        const double d = d_[static_cast<size_t>(j)];
        if (d < -kEps) {
          if (bland) {
            enter = j;
            break;
          }
          if (d < best) {
            best = d;
            enter = j;
          }
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      // Two-pass ratio test: find the tightest ratio over pivots of
      // honest magnitude, then among near-ties prefer the largest pivot
      // (Bland mode: the smallest basis index, for termination).
      int leave = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      bool any_positive = false;
      for (int r = 0; r < m_; ++r) {
        const double a =
            tableau_[static_cast<size_t>(r)][static_cast<size_t>(enter)];
        if (a > kEps) any_positive = true;
        if (a > kPivTol)
          best_ratio = std::min(best_ratio, rhs_[static_cast<size_t>(r)] / a);
      }
      if (!any_positive) return LpStatus::Unbounded;
      if (std::isfinite(best_ratio)) {
        const double slack_band = 1e-9 * (1.0 + std::abs(best_ratio));
        double best_piv = 0.0;
        for (int r = 0; r < m_; ++r) {
          const double a =
              tableau_[static_cast<size_t>(r)][static_cast<size_t>(enter)];
          if (a <= kPivTol) continue;
          const double ratio = rhs_[static_cast<size_t>(r)] / a;
          if (ratio > best_ratio + slack_band) continue;
          if (bland) {
            if (leave < 0 || basis_[static_cast<size_t>(r)] <
                                 basis_[static_cast<size_t>(leave)])
              leave = r;
          } else if (a > best_piv) {
            best_piv = a;
            leave = r;
          }
        }
      } else {
        // Only sub-threshold pivots exist; take the largest available.
        double best_piv = kEps;
        for (int r = 0; r < m_; ++r) {
          const double a =
              tableau_[static_cast<size_t>(r)][static_cast<size_t>(enter)];
          if (a > best_piv) {
            best_piv = a;
            leave = r;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    return LpStatus::IterationLimit;
  }

  void pivot(int r, int c) {
    auto& prow = tableau_[static_cast<size_t>(r)];
    const double piv = prow[static_cast<size_t>(c)];
    for (auto& v : prow) v /= piv;
    prow[static_cast<size_t>(c)] = 1.0;
    rhs_[static_cast<size_t>(r)] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      auto& row = tableau_[static_cast<size_t>(i)];
      const double f = row[static_cast<size_t>(c)];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols_; ++j)
        row[static_cast<size_t>(j)] -= f * prow[static_cast<size_t>(j)];
      row[static_cast<size_t>(c)] = 0.0;
      rhs_[static_cast<size_t>(i)] -= f * rhs_[static_cast<size_t>(r)];
      if (rhs_[static_cast<size_t>(i)] < 0.0 &&
          rhs_[static_cast<size_t>(i)] > -1e-11)
        rhs_[static_cast<size_t>(i)] = 0.0;
    }
    const double fd = d_[static_cast<size_t>(c)];
    if (fd != 0.0) {
      for (int j = 0; j < ncols_; ++j)
        d_[static_cast<size_t>(j)] -= fd * prow[static_cast<size_t>(j)];
      d_[static_cast<size_t>(c)] = 0.0;
      objective_ += fd * rhs_[static_cast<size_t>(r)];
    }
    in_basis_[static_cast<size_t>(basis_[static_cast<size_t>(r)])] = 0;
    in_basis_[static_cast<size_t>(c)] = 1;
    basis_[static_cast<size_t>(r)] = c;
  }

  // Pivot zero-valued basic artificials onto structural columns where
  // possible; rows with no candidate are redundant and stay as they are.
  void expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[static_cast<size_t>(r)] < first_artificial_) continue;
      for (int j = 0; j < n_struct_; ++j) {
        if (in_basis_[static_cast<size_t>(j)]) continue;
        if (std::abs(
                tableau_[static_cast<size_t>(r)][static_cast<size_t>(j)]) >
            1e-7) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  Standard st_;
  int m_;
  int n_struct_ = 0;
  int first_artificial_ = 0;
  int ncols_ = 0;
  long max_iters_;
  bool conservative_ = false;
  int artificial_rows_ = 0;
  double objective_ = 0.0;
  std::vector<std::vector<double>> tableau_;
  std::vector<double> rhs_;
  std::vector<double> d_;
  std::vector<int> basis_;
  std::vector<char> in_basis_;
};

// Largest relative violation of the original rows and bounds at x.
double violation(const LpProblem& p, const std::vector<double>& x) {
  double worst = 0.0;
  for (int j = 0; j < p.num_vars; ++j) {
    const double v = x[static_cast<size_t>(j)];
    if (finite(p.lower[static_cast<size_t>(j)]))
      worst = std::max(worst, p.lower[static_cast<size_t>(j)] - v);
    if (finite(p.upper[static_cast<size_t>(j)]))
      worst = std::max(worst, v - p.upper[static_cast<size_t>(j)]);
  }
  for (const auto& row : p.rows) {
    double lhs = 0.0;
    double scale = 1.0;
    for (int j = 0; j < p.num_vars; ++j) {
      lhs += row.a[static_cast<size_t>(j)] * x[static_cast<size_t>(j)];
      scale = std::max(scale, std::abs(row.a[static_cast<size_t>(j)]));
    }
    const double slack = row.b - lhs;
    double bad = 0.0;
    if (row.sense == '<')
      bad = -slack;
    else if (row.sense == '>')
      bad = slack;
    else
      bad = std::abs(slack);
    worst = std::max(worst, bad / scale);
  }
  return worst;
}

LpResult attempt(const LpProblem& p, long max_iters, bool conservative) {
  Simplex simplex(build_standard(p), max_iters, conservative);
  const LpStatus status = simplex.run();
  LpResult res;
  res.status = status;
  if (status != LpStatus::Optimal) return res;

  const auto y = simplex.solution_y();
  const auto& st = simplex.standard();
  res.x.assign(static_cast<size_t>(p.num_vars), 0.0);
  for (int j = 0; j < p.num_vars; ++j) {
    const auto& vm = st.vars[static_cast<size_t>(j)];
    double v = vm.shift + vm.sign * y[static_cast<size_t>(vm.col)];
    if (vm.neg_col >= 0) v -= y[static_cast<size_t>(vm.neg_col)];
    res.x[static_cast<size_t>(j)] = v;
  }
  res.value = 0.0;
  for (int j = 0; j < p.num_vars; ++j)
    res.value += p.c[static_cast<size_t>(j)] * res.x[static_cast<size_t>(j)];
  return res;
}

}  // namespace

LpResult solve_lp(const LpProblem& p, long max_iters) {
  for (int j = 0; j < p.num_vars; ++j)
    if (p.lower[static_cast<size_t>(j)] >
        p.upper[static_cast<size_t>(j)] + 1e-15)
      return LpResult{LpStatus::Infeasible, {}, 0.0};

  LpResult res = attempt(p, max_iters, /*conservative=*/false);
  const bool suspect =
      res.status == LpStatus::Infeasible ||
      res.status == LpStatus::IterationLimit ||
      (res.status == LpStatus::Optimal && violation(p, res.x) > 1e-6);
  if (suspect) {
    // Degenerate instances can stall the fast pivot rule; re-run with
    // Bland's rule from the start before trusting a negative verdict.
    LpResult retry = attempt(p, max_iters, /*conservative=*/true);
    if (retry.status == LpStatus::Optimal && violation(p, retry.x) > 1e-6)
      throw AlgorithmError("solve_lp: solution fails feasibility check");
    return retry;
  }
  return res;
}

}  // namespace walkopt
