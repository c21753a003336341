#include "walkopt/acpc.hpp"

#include <cmath>

#include "walkopt/lp.hpp"

namespace walkopt {

HalfspacePolytope build_acpc_polytope(const Mdp& m, const NodeSet& S,
                                      double lambda, double zeta) {
  if (lambda < 0.0) throw ValidationError("build_acpc_polytope: lambda < 0");
  if (zeta <= 0.0) throw ValidationError("build_acpc_polytope: zeta <= 0");
  HalfspacePolytope p;
  p.box = zeta;
  for (Node i = 0; i < m.n(); ++i)
    for (int a = 0; a < m.num_actions(i); ++a) {
      std::vector<double> row(static_cast<size_t>(m.n()), 0.0);
      const auto& pr = m.row(i, a);
      for (Node j = 0; j < m.n(); ++j)
        row[static_cast<size_t>(j)] = -pr[static_cast<size_t>(j)];
      row[static_cast<size_t>(i)] += 1.0;
      p.A.push_back(std::move(row));
      p.b.push_back(S.contains(i) ? 1.0 - lambda : 1.0);
    }
  return p;
}

double polytope_margin(const HalfspacePolytope& p) {
  if (p.A.empty()) return p.box;  // nothing cuts the box
  const int n = p.dim();
  LpProblem lp(n + 1);
  const int t = n;
  lp.c[static_cast<size_t>(t)] = -1.0;
  for (int j = 0; j < n; ++j) lp.set_bounds(j, -p.box, p.box);
  // t stays free; any single row bounds it from above.
  for (size_t r = 0; r < p.A.size(); ++r) {
    std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
    for (int j = 0; j < n; ++j) row[static_cast<size_t>(j)] = p.A[r][static_cast<size_t>(j)];
    row[static_cast<size_t>(t)] = 1.0;
    lp.add_row(std::move(row), '<', p.b[r]);
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    throw AlgorithmError("polytope_margin: LP returned " +
                         to_string(res.status));
  return -res.value;
}

bool polytope_empty_interior(const HalfspacePolytope& p, double tol) {
  return polytope_margin(p) <= tol;
}

Estimate volume_estimate(const HalfspacePolytope& p, long n_samples,
                         std::uint64_t seed) {
  if (n_samples < 1) throw ValidationError("volume_estimate: n_samples < 1");
  const int n = p.dim() > 0 ? p.dim()
                            : throw ValidationError("volume_estimate: empty system");
  long inside = 0;
  std::vector<double> h(static_cast<size_t>(n));
  for (long s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
    for (auto& v : h) v = rng.uniform(-p.box, p.box);
    bool ok = true;
    for (size_t r = 0; r < p.A.size() && ok; ++r) {
      double lhs = 0.0;
      for (int j = 0; j < n; ++j)
        lhs += p.A[r][static_cast<size_t>(j)] * h[static_cast<size_t>(j)];
      ok = lhs <= p.b[r];
    }
    if (ok) ++inside;
  }
  const double box_volume = std::pow(2.0 * p.box, n);
  const double frac = static_cast<double>(inside) / static_cast<double>(n_samples);
  Estimate est;
  est.value = box_volume * frac;
  est.half_width = box_volume * 1.96 *
                   std::sqrt(std::max(0.0, frac * (1.0 - frac) /
                                               static_cast<double>(n_samples)));
  est.samples = n_samples;
  return est;
}

RLambdaSampler::RLambdaSampler(const Mdp& m, double lambda, double zeta,
                               long n_samples, std::uint64_t seed)
    : n_(n_samples) {
  if (n_samples < 1) throw ValidationError("RLambdaSampler: n_samples < 1");
  if (zeta <= 0.0) throw ValidationError("RLambdaSampler: zeta <= 0");
  cell_ = std::pow(2.0 * zeta, m.n()) / static_cast<double>(n_samples);
  std::vector<double> h(static_cast<size_t>(m.n()));
  for (long s = 0; s < n_samples; ++s) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
    for (auto& v : h) v = rng.uniform(-zeta, zeta);
    // Worst row value per state; the sample survives set S iff the
    // S-independent rows pass and no state of S exceeds 1 - lambda.
    bool base = true;
    std::vector<char> blocked(static_cast<size_t>(m.n()), 0);
    for (Node i = 0; i < m.n() && base; ++i) {
      double worst = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < m.num_actions(i); ++a) {
        const auto& pr = m.row(i, a);
        double lhs = h[static_cast<size_t>(i)];
        for (Node j = 0; j < m.n(); ++j)
          lhs -= pr[static_cast<size_t>(j)] * h[static_cast<size_t>(j)];
        worst = std::max(worst, lhs);
      }
      if (worst > 1.0) base = false;
      else if (worst > 1.0 - lambda) blocked[static_cast<size_t>(i)] = 1;
    }
    if (base) {
      ++base_count_;
      blocked_.push_back(std::move(blocked));
    }
  }
}

double RLambdaSampler::value(const NodeSet& S) const {
  long alive = 0;
  for (const auto& blocked : blocked_) {
    bool cut = false;
    for (Node s : S)
      if (blocked[static_cast<size_t>(s)]) {
        cut = true;
        break;
      }
    if (!cut) ++alive;
  }
  return cell_ * static_cast<double>(alive);
}

double r_lambda(const Mdp& m, const NodeSet& S, double lambda, double zeta,
                long n_samples, std::uint64_t seed) {
  return RLambdaSampler(m, lambda, zeta, n_samples, seed).value(S);
}

// Ranking uses the shared samples; when the sample signal is dead the
// margin itself ranks candidates.
AcpcCover acpc_greedy_cover(const Mdp& m, double lambda, double zeta,
                            const AcpcSelectConfig& cfg) {
  const RLambdaSampler sampler(m, lambda, zeta, cfg.n_samples, cfg.seed);
  const bool use_samples = sampler.base_count() > 0;
  SetFunction f = [&](const NodeSet& S) {
    if (use_samples) return sampler.value(S);
    return std::max(0.0, polytope_margin(build_acpc_polytope(m, S, lambda, zeta)));
  };
  GreedyOptions opts;
  opts.confirmations = cfg.confirmations;
  opts.stop = [&](const NodeSet& S) {
    return polytope_empty_interior(build_acpc_polytope(m, S, lambda, zeta),
                                   cfg.lp_tol);
  };
  AcpcCover out;
  try {
    out.report = greedy_min_cover(f, NodeSet::full(m.n()), 0.0, opts);
    out.covered = true;
  } catch (const AlgorithmError&) {
    out.covered = false;  // not coverable at this lambda at any size
  }
  return out;
}

AcpcSelection min_acpc_select(const Mdp& m, int k, double delta, double zeta,
                              const AcpcSelectConfig& cfg) {
  if (k < 1 || k > m.n()) throw ValidationError("min_acpc_select: bad k");
  if (delta <= 0.0) throw ValidationError("min_acpc_select: delta <= 0");
  if (zeta <= 0.0) zeta = 10.0 * static_cast<double>(m.n());

  // Bracket: the worst single-state ACPC, pushed up until some k-set
  // covers (the emptiness test is sufficient, not necessary, so the
  // oracle bound alone need not be coverable).
  double lambda_max = 0.0;
  for (Node v = 0; v < m.n(); ++v)
    lambda_max =
        std::max(lambda_max, acpc_optimal(m, NodeSet{v}, cfg.oracle_tol).lambda);
  double lambda_min = 0.0;
  AcpcSelection best;
  bool have_feasible = false;
  for (int guard = 0;; ++guard) {
    AcpcCover out = acpc_greedy_cover(m, lambda_max, zeta, cfg);
    if (out.covered && out.report.chosen.size() <= k) {
      best.chosen = out.report.chosen;
      best.greedy_report = out.report;
      have_feasible = true;
      break;
    }
    lambda_min = lambda_max;
    lambda_max *= 2.0;
    if (guard > 60)
      throw AlgorithmError(
          "min_acpc_select: no feasible k-set found at any lambda level");
  }

  while (lambda_max - lambda_min > delta) {
    const double lambda = 0.5 * (lambda_min + lambda_max);
    AcpcCover out = acpc_greedy_cover(m, lambda, zeta, cfg);
    if (out.covered && out.report.chosen.size() <= k) {
      lambda_max = lambda;
      best.chosen = out.report.chosen;
      best.greedy_report = out.report;
      have_feasible = true;
    } else {
      lambda_min = lambda;
    }
  }
  if (!have_feasible)
    throw AlgorithmError("min_acpc_select: bisection found no feasible set");
  best.lambda_hat = lambda_max;
  best.certificate = acpc_optimal(m, best.chosen, cfg.oracle_tol).lambda;
  return best;
}

int chi_indicator(const std::vector<double>& v, const NodeSet& S, const Mdp& m,
                  double theta) {
  if (theta <= 0.0) throw ValidationError("chi_indicator: theta <= 0");
  if (static_cast<int>(v.size()) != m.n())
    throw ValidationError("chi_indicator: v size mismatch");
  for (Node i = 0; i < m.n(); ++i) {
    const double scale = S.contains(i) ? 1.0 + theta : 1.0;
    for (int a = 0; a < m.num_actions(i); ++a) {
      const auto& pr = m.row(i, a);
      double rhs = 1.0;
      for (Node j = 0; j < m.n(); ++j)
        rhs += pr[static_cast<size_t>(j)] * v[static_cast<size_t>(j)];
      if (v[static_cast<size_t>(i)] * scale > rhs) return 0;
    }
  }
  return 1;
}

namespace {

// Shared-sample evaluator of the chi integral, mirroring RLambdaSampler.
class ChiSampler {
 public:
  ChiSampler(const Mdp& m, double zeta_level, double v_max, long n_samples,
             std::uint64_t seed, double theta)
      : n_(n_samples) {
    if (n_samples < 1) throw ValidationError("ChiSampler: n_samples < 1");
    if (v_max <= 0.0) throw ValidationError("ChiSampler: v_max <= 0");
    cell_ = std::pow(v_max, m.n()) / static_cast<double>(n_samples);
    std::vector<double> v(static_cast<size_t>(m.n()));
    for (long s = 0; s < n_samples; ++s) {
      Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(s));
      double sum = 0.0;
      for (auto& x : v) {
        x = rng.uniform(0.0, v_max);
        sum += x;
      }
      if (sum < zeta_level) continue;  // outside the integration region
      bool base = true;
      std::vector<char> blocked(static_cast<size_t>(m.n()), 0);
      for (Node i = 0; i < m.n() && base; ++i) {
        double floor = std::numeric_limits<double>::infinity();
        for (int a = 0; a < m.num_actions(i); ++a) {
          const auto& pr = m.row(i, a);
          double rhs = 1.0;
          for (Node j = 0; j < m.n(); ++j)
            rhs += pr[static_cast<size_t>(j)] * v[static_cast<size_t>(j)];
          floor = std::min(floor, rhs);
        }
        if (v[static_cast<size_t>(i)] > floor) base = false;
        else if (v[static_cast<size_t>(i)] * (1.0 + theta) > floor)
          blocked[static_cast<size_t>(i)] = 1;
      }
      if (base) {
        ++base_count_;
        blocked_.push_back(std::move(blocked));
      }
    }
  }

  double value(const NodeSet& S) const {
    long alive = 0;
    for (const auto& blocked : blocked_) {
      bool cut = false;
      for (Node s : S)
        if (blocked[static_cast<size_t>(s)]) {
          cut = true;
          break;
        }
      if (!cut) ++alive;
    }
    return cell_ * static_cast<double>(alive);
  }
  long base_count() const { return base_count_; }

 private:
  long n_;
  long base_count_ = 0;
  double cell_;
  std::vector<std::vector<char>> blocked_;
};

// Margin LP of the truncated chi region: v in [0, v_max]^n, v = 0 on S,
// all Bellman rows slack by t, and 1.v >= zeta + t.
double chi_margin(const Mdp& m, const NodeSet& S, double zeta_level,
                  double v_max) {
  const int n = m.n();
  LpProblem lp(n + 1);
  const int t = n;
  lp.c[static_cast<size_t>(t)] = -1.0;
  for (Node i = 0; i < n; ++i) lp.set_bounds(i, 0.0, v_max);
  for (Node s : S) lp.set_bounds(s, 0.0, 0.0);
  for (Node i = 0; i < n; ++i)
    for (int a = 0; a < m.num_actions(i); ++a) {
      std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
      const auto& pr = m.row(i, a);
      for (Node j = 0; j < n; ++j)
        row[static_cast<size_t>(j)] = -pr[static_cast<size_t>(j)];
      row[static_cast<size_t>(i)] += 1.0;
      bool zero = true;
      for (Node j = 0; j < n; ++j)
        if (std::abs(row[static_cast<size_t>(j)]) > 1e-15) {
          zero = false;
          break;
        }
      if (zero) continue;  // self-loop rows cut nothing here (b = 1 > 0)
      row[static_cast<size_t>(t)] = 1.0;
      lp.add_row(std::move(row), '<', 1.0);
    }
  {
    std::vector<double> row(static_cast<size_t>(n + 1), 0.0);
    for (Node j = 0; j < n; ++j) row[static_cast<size_t>(j)] = -1.0;
    row[static_cast<size_t>(t)] = 1.0;
    lp.add_row(std::move(row), '<', -zeta_level);
  }
  const LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal)
    throw AlgorithmError("chi_margin: LP returned " + to_string(res.status));
  return -res.value;
}

}  // namespace

double chi_integral(const Mdp& m, const NodeSet& S, double zeta_level,
                    double v_max, long n_samples, std::uint64_t seed,
                    double theta) {
  return ChiSampler(m, zeta_level, v_max, n_samples, seed, theta).value(S);
}

HittingSelection min_hitting_select(const Mdp& m, int k, double delta,
                                    const AcpcSelectConfig& cfg) {
  if (k < 1 || k > m.n()) throw ValidationError("min_hitting_select: bad k");
  if (delta <= 0.0) throw ValidationError("min_hitting_select: delta <= 0");

  // Any zeta above the worst single-state certificate is coverable by a
  // singleton, so it brackets the bisection from above.
  double zeta_max = 0.0;
  for (Node v = 0; v < m.n(); ++v) {
    const auto h = min_hitting_time_vi(m, NodeSet{v});
    double sum = 0.0;
    for (double x : h) sum += x;
    zeta_max = std::max(zeta_max, sum);
  }
  zeta_max = zeta_max * 1.01 + 1.0;
  double zeta_min = 0.0;

  const auto cover_at = [&](double zeta) {
    const double v_max = 2.0 * std::max(zeta, 1.0);
    const ChiSampler sampler(m, zeta, v_max, cfg.n_samples, cfg.seed,
                             cfg.theta);
    const bool use_samples = sampler.base_count() > 0;
    SetFunction f = [&](const NodeSet& S) {
      if (use_samples) return sampler.value(S);
      return std::max(0.0, chi_margin(m, S, zeta, v_max));
    };
    GreedyOptions opts;
    opts.confirmations = cfg.confirmations;
    opts.stop = [&](const NodeSet& S) {
      return chi_margin(m, S, zeta, v_max) <= cfg.lp_tol;
    };
    AcpcCover out;
    try {
      out.report = greedy_min_cover(f, NodeSet::full(m.n()), 0.0, opts);
      out.covered = true;
    } catch (const AlgorithmError&) {
      out.covered = false;
    }
    return out;
  };

  HittingSelection best;
  bool have_feasible = false;
  {
    AcpcCover out = cover_at(zeta_max);
    if (out.covered && out.report.chosen.size() <= k) {
      best.chosen = out.report.chosen;
      best.greedy_report = out.report;
      have_feasible = true;
    }
  }
  if (!have_feasible)
    throw AlgorithmError("min_hitting_select: no feasible set at zeta_max");

  while (zeta_max - zeta_min > delta) {
    const double zeta = 0.5 * (zeta_min + zeta_max);
    AcpcCover out = cover_at(zeta);
    if (out.covered && out.report.chosen.size() <= k) {
      zeta_max = zeta;
      best.chosen = out.report.chosen;
      best.greedy_report = out.report;
    } else {
      zeta_min = zeta;
    }
  }
  best.zeta_hat = zeta_max;
  const auto h = min_hitting_time_vi(m, best.chosen);
  best.certificate = 0.0;
  for (double x : h) best.certificate += x;
  return best;
}

}  // namespace walkopt
