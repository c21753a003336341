#include "walkopt/mdp.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace walkopt {

Mdp::Mdp(std::vector<std::vector<std::vector<double>>> kernel, NodeSet unsafe)
    : n_(static_cast<int>(kernel.size())),
      total_actions_(0),
      kernel_(std::move(kernel)),
      unsafe_(std::move(unsafe)) {
  if (n_ == 0) throw ValidationError("Mdp: no states");
  for (int i = 0; i < n_; ++i) {
    const auto& acts = kernel_[static_cast<size_t>(i)];
    if (acts.empty())
      throw ValidationError("Mdp: state " + std::to_string(i) +
                            " has no action row");
    for (const auto& row : acts) {
      if (static_cast<int>(row.size()) != n_)
        throw ValidationError("Mdp: row length mismatch at state " +
                              std::to_string(i));
      double sum = 0.0;
      for (double v : row) {
        if (v < 0.0 || v > 1.0 + 1e-9)
          throw ValidationError("Mdp: transition probability outside [0,1]");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("Mdp: action row at state " + std::to_string(i) +
                              " sums to " + std::to_string(sum));
      ++total_actions_;
    }
  }
  for (Node r : unsafe_)
    if (r >= n_) throw ValidationError("Mdp: unsafe node out of range");
}

const std::vector<int>& EndComponent::actions_of(Node i) const {
  const auto& m = states.members();
  auto it = std::lower_bound(m.begin(), m.end(), i);
  if (it == m.end() || *it != i)
    throw ValidationError("EndComponent: state not in component");
  return allowed[static_cast<size_t>(it - m.begin())];
}

StochasticGraph induced_chain(const Mdp& m, const Policy& mu) {
  if (static_cast<int>(mu.choice.size()) != m.n())
    throw ValidationError("induced_chain: policy size mismatch");
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<size_t>(m.n()));
  for (Node i = 0; i < m.n(); ++i) {
    const int a = mu(i);
    if (a < 0 || a >= m.num_actions(i))
      throw ValidationError("induced_chain: invalid action " +
                            std::to_string(a) + " at state " +
                            std::to_string(i));
    rows.push_back(m.row(i, a));
  }
  return StochasticGraph::from_rows(rows);
}

namespace {

// Tarjan SCC over the sub-graph spanned by `alive` states and their
// currently allowed actions.
struct SccFinder {
  const Mdp& m;
  const std::vector<std::vector<int>>& allowed;  // per state
  const std::vector<char>& alive;

  std::vector<int> index, low, comp;
  std::vector<char> on_stack;
  std::vector<Node> stack;
  int counter = 0, comps = 0;

  explicit SccFinder(const Mdp& mdp, const std::vector<std::vector<int>>& al,
                     const std::vector<char>& av)
      : m(mdp),
        allowed(al),
        alive(av),
        index(static_cast<size_t>(mdp.n()), -1),
        low(static_cast<size_t>(mdp.n()), 0),
        comp(static_cast<size_t>(mdp.n()), -1),
        on_stack(static_cast<size_t>(mdp.n()), 0) {}

  void run() {
    for (Node i = 0; i < m.n(); ++i)
      if (alive[static_cast<size_t>(i)] && index[static_cast<size_t>(i)] < 0)
        dfs(i);
  }

  // Iterative DFS; explicit frame to avoid stack depth limits.
  void dfs(Node root) {
    struct Frame {
      Node v;
      size_t ai = 0, ji = 0;
    };
    std::vector<Frame> frames{{root}};
    enter(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      bool descended = false;
      while (f.ai < allowed[static_cast<size_t>(f.v)].size()) {
        const auto& row =
            m.row(f.v, allowed[static_cast<size_t>(f.v)][f.ai]);
        while (f.ji < row.size()) {
          const Node j = static_cast<Node>(f.ji);
          ++f.ji;
          if (row[static_cast<size_t>(j)] <= 0.0 ||
              !alive[static_cast<size_t>(j)])
            continue;
          if (index[static_cast<size_t>(j)] < 0) {
            frames.push_back({j});
            enter(j);
            descended = true;
            break;
          }
          if (on_stack[static_cast<size_t>(j)])
            low[static_cast<size_t>(f.v)] = std::min(
                low[static_cast<size_t>(f.v)], index[static_cast<size_t>(j)]);
        }
        if (descended) break;
        ++f.ai;
        f.ji = 0;
      }
      if (descended) continue;
      const Node v = f.v;
      frames.pop_back();
      if (!frames.empty())
        low[static_cast<size_t>(frames.back().v)] =
            std::min(low[static_cast<size_t>(frames.back().v)],
                     low[static_cast<size_t>(v)]);
      if (low[static_cast<size_t>(v)] == index[static_cast<size_t>(v)]) {
        while (true) {
          Node w = stack.back();
          stack.pop_back();
          on_stack[static_cast<size_t>(w)] = 0;
          comp[static_cast<size_t>(w)] = comps;
          if (w == v) break;
        }
        ++comps;
      }
    }
  }

  void enter(Node v) {
    index[static_cast<size_t>(v)] = low[static_cast<size_t>(v)] = counter++;
    stack.push_back(v);
    on_stack[static_cast<size_t>(v)] = 1;
  }
};

}  // namespace

std::vector<EndComponent> mec_decomposition(const Mdp& m) {
  std::vector<std::vector<int>> allowed(static_cast<size_t>(m.n()));
  for (Node i = 0; i < m.n(); ++i)
    for (int a = 0; a < m.num_actions(i); ++a)
      allowed[static_cast<size_t>(i)].push_back(a);
  std::vector<char> alive(static_cast<size_t>(m.n()), 1);

  bool changed = true;
  std::vector<int> comp;
  while (changed) {
    changed = false;
    SccFinder scc(m, allowed, alive);
    scc.run();
    comp = scc.comp;
    // Remove actions whose support leaves the state's SCC, then states
    // left with no actions.
    for (Node i = 0; i < m.n(); ++i) {
      if (!alive[static_cast<size_t>(i)]) continue;
      auto& acts = allowed[static_cast<size_t>(i)];
      std::vector<int> keep;
      for (int a : acts) {
        bool stays = true;
        const auto& row = m.row(i, a);
        for (Node j = 0; j < m.n(); ++j) {
          if (row[static_cast<size_t>(j)] <= 0.0) continue;
          if (!alive[static_cast<size_t>(j)] ||
              comp[static_cast<size_t>(j)] != comp[static_cast<size_t>(i)]) {
            stays = false;
            break;
          }
        }
        if (stays) keep.push_back(a);
      }
      if (keep.size() != acts.size()) changed = true;
      acts = std::move(keep);
      if (acts.empty() && alive[static_cast<size_t>(i)]) {
        alive[static_cast<size_t>(i)] = 0;
        changed = true;
      }
    }
  }

  // Group surviving states by component id.
  std::vector<std::vector<Node>> groups;
  std::vector<int> group_of(static_cast<size_t>(m.n()), -1);
  for (Node i = 0; i < m.n(); ++i) {
    if (!alive[static_cast<size_t>(i)]) continue;
    const int c = comp[static_cast<size_t>(i)];
    int& g = group_of[static_cast<size_t>(c)];
    if (g < 0) {
      g = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<size_t>(g)].push_back(i);
  }

  std::vector<EndComponent> mecs;
  for (auto& g : groups) {
    EndComponent ec;
    ec.states = NodeSet(g);
    for (Node i : ec.states)
      ec.allowed.push_back(allowed[static_cast<size_t>(i)]);
    mecs.push_back(std::move(ec));
  }
  return mecs;
}

std::vector<EndComponent> amec_filter(const std::vector<EndComponent>& mecs,
                                      const NodeSet& R) {
  std::vector<EndComponent> out;
  for (const auto& ec : mecs)
    if (ec.states.disjoint_from(R)) out.push_back(ec);
  return out;
}

NodeSet RestrictedMdp::restrict_set(const NodeSet& parent_set) const {
  std::vector<Node> local;
  for (size_t k = 0; k < to_parent.size(); ++k)
    if (parent_set.contains(to_parent[k])) local.push_back(static_cast<Node>(k));
  return NodeSet(local);
}

RestrictedMdp restrict_to_component(const Mdp& m, const EndComponent& ec) {
  const auto& states = ec.states.members();
  std::vector<int> local_of(static_cast<size_t>(m.n()), -1);
  for (size_t k = 0; k < states.size(); ++k)
    local_of[static_cast<size_t>(states[k])] = static_cast<int>(k);

  std::vector<std::vector<std::vector<double>>> kernel(states.size());
  for (size_t k = 0; k < states.size(); ++k) {
    const Node i = states[k];
    for (int a : ec.allowed[k]) {
      std::vector<double> row(states.size(), 0.0);
      const auto& parent_row = m.row(i, a);
      for (size_t l = 0; l < states.size(); ++l)
        row[l] = parent_row[static_cast<size_t>(states[l])];
      // Closure guarantees the mass stays inside the component.
      double sum = 0.0;
      for (double v : row) sum += v;
      if (std::abs(sum - 1.0) > 1e-9)
        throw ValidationError("restrict_to_component: action leaks mass");
      kernel[k].push_back(std::move(row));
    }
    if (kernel[k].empty())
      throw ValidationError("restrict_to_component: state without actions");
  }
  RestrictedMdp out{Mdp(std::move(kernel)), states};
  return out;
}

Mdp gen_lattice_mdp(int rows, int cols, double p_c) {
  if (rows < 2 || cols < 2)
    throw ValidationError("gen_lattice_mdp: rows and cols must be >= 2");
  if (p_c <= 0.0 || p_c > 1.0)
    throw ValidationError("gen_lattice_mdp: p_c must be in (0,1]");
  const int n = rows * cols;
  // Direction order: left, right, up, down.
  const int dr[4] = {0, 0, -1, 1};
  const int dc[4] = {-1, 1, 0, 0};

  std::vector<std::vector<std::vector<double>>> kernel(
      static_cast<size_t>(n));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Node s = lattice_state(r, c, cols);
      std::vector<Node> target(4, -1);
      std::vector<int> feasible;
      for (int d = 0; d < 4; ++d) {
        const int nr = r + dr[d], nc = c + dc[d];
        if (nr >= 0 && nr < rows && nc >= 0 && nc < cols) {
          target[static_cast<size_t>(d)] = lattice_state(nr, nc, cols);
          feasible.push_back(d);
        }
      }
      for (int a = 0; a < 4; ++a) {
        double weight[4];
        for (int d = 0; d < 4; ++d)
          weight[d] = (d == a ? p_c : 0.0) + (1.0 - p_c) / 4.0;
        double invalid_mass = 0.0;
        for (int d = 0; d < 4; ++d)
          if (target[static_cast<size_t>(d)] < 0) {
            invalid_mass += weight[d];
            weight[d] = 0.0;
          }
        const double redistribute =
            invalid_mass / static_cast<double>(feasible.size());
        std::vector<double> row(static_cast<size_t>(n), 0.0);
        for (int d : feasible)
          row[static_cast<size_t>(target[static_cast<size_t>(d)])] +=
              weight[d] + redistribute;
        kernel[static_cast<size_t>(s)].push_back(std::move(row));
      }
    }
  }
  return Mdp(std::move(kernel));
}

Mdp gen_random_mdp(int n, std::uint64_t seed) {
  if (n < 2) throw ValidationError("gen_random_mdp: n must be >= 2");
  Rng rng(seed);
  std::vector<std::vector<std::vector<double>>> kernel(static_cast<size_t>(n));
  for (Node i = 0; i < n; ++i)
    for (int a = 0; a < 4; ++a)
      kernel[static_cast<size_t>(i)].push_back(sample_simplex(n, rng));
  return Mdp(std::move(kernel));
}

Mdp load_mdp_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open MDP file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("MDP JSON parse error: " + std::string(e.what()));
  }
  if (!j.contains("n") || !j.contains("actions") || !j.contains("transitions"))
    throw ValidationError("MDP JSON missing required fields n/actions/transitions");
  const int n = j["n"].get<int>();
  const auto counts = j["actions"].get<std::vector<int>>();
  if (static_cast<int>(counts.size()) != n)
    throw ValidationError("MDP JSON: actions array length != n");
  std::vector<std::vector<std::vector<double>>> kernel(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (counts[static_cast<size_t>(i)] < 1)
      throw ValidationError("MDP JSON: state " + std::to_string(i) +
                            " declares no actions");
    kernel[static_cast<size_t>(i)].assign(
        static_cast<size_t>(counts[static_cast<size_t>(i)]),
        std::vector<double>(static_cast<size_t>(n), 0.0));
  }
  for (const auto& t : j["transitions"]) {
    if (!t.is_array() || t.size() != 4)
      throw ValidationError("MDP JSON: transition entry must be [i,a,j,p]");
    const int i = t[0].get<int>(), a = t[1].get<int>(), to = t[2].get<int>();
    const double p = t[3].get<double>();
    if (i < 0 || i >= n || to < 0 || to >= n || a < 0 ||
        a >= counts[static_cast<size_t>(i)])
      throw ValidationError("MDP JSON: transition index out of range");
    kernel[static_cast<size_t>(i)][static_cast<size_t>(a)]
          [static_cast<size_t>(to)] += p;
  }
  NodeSet unsafe;
  if (j.contains("unsafe"))
    unsafe = NodeSet(j["unsafe"].get<std::vector<int>>());
  try {
    return Mdp(std::move(kernel), unsafe);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("MDP JSON: ") + e.what());
  }
}

void save_mdp_json(const Mdp& m, const std::string& path) {
  nlohmann::json j;
  j["n"] = m.n();
  std::vector<int> counts;
  for (Node i = 0; i < m.n(); ++i) counts.push_back(m.num_actions(i));
  j["actions"] = counts;
  nlohmann::json transitions = nlohmann::json::array();
  for (Node i = 0; i < m.n(); ++i)
    for (int a = 0; a < m.num_actions(i); ++a) {
      const auto& row = m.row(i, a);
      for (Node to = 0; to < m.n(); ++to)
        if (row[static_cast<size_t>(to)] > 0.0)
          transitions.push_back({i, a, to, row[static_cast<size_t>(to)]});
    }
  j["transitions"] = std::move(transitions);
  j["unsafe"] = m.unsafe().members();
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write MDP file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace walkopt
