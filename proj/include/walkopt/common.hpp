#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace walkopt {

using Node = int;

// Thrown on malformed inputs: bad probabilities, out-of-range indices,
// unparseable files. Maps to CLI exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a solver cannot produce a result: divergent iteration,
// unreachable target structure, infeasible problem where feasibility was
// required. Maps to CLI exit code 3.
struct AlgorithmError : std::runtime_error {
  explicit AlgorithmError(const std::string& what) : std::runtime_error(what) {}
};

// Sorted duplicate-free set of node indices.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::vector<Node> members) : v_(std::move(members)) {
    std::sort(v_.begin(), v_.end());
    v_.erase(std::unique(v_.begin(), v_.end()), v_.end());
    if (!v_.empty() && v_.front() < 0)
      throw ValidationError("NodeSet: negative node index");
  }
  NodeSet(std::initializer_list<Node> members)
      : NodeSet(std::vector<Node>(members)) {}

  static NodeSet full(int n) {
    std::vector<Node> m(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) m[static_cast<size_t>(i)] = i;
    return NodeSet(std::move(m));
  }

  const std::vector<Node>& members() const { return v_; }
  int size() const { return static_cast<int>(v_.size()); }
  bool empty() const { return v_.empty(); }
  bool contains(Node i) const {
    return std::binary_search(v_.begin(), v_.end(), i);
  }
  NodeSet with(Node i) const {
    auto m = v_;
    m.push_back(i);
    return NodeSet(std::move(m));
  }
  NodeSet without(Node i) const {
    std::vector<Node> m;
    m.reserve(v_.size());
    for (Node x : v_)
      if (x != i) m.push_back(x);
    NodeSet s;
    s.v_ = std::move(m);
    return s;
  }
  NodeSet unite(const NodeSet& other) const {
    std::vector<Node> m;
    std::set_union(v_.begin(), v_.end(), other.v_.begin(), other.v_.end(),
                   std::back_inserter(m));
    NodeSet s;
    s.v_ = std::move(m);
    return s;
  }
  NodeSet intersect(const NodeSet& other) const {
    std::vector<Node> m;
    std::set_intersection(v_.begin(), v_.end(), other.v_.begin(),
                          other.v_.end(), std::back_inserter(m));
    NodeSet s;
    s.v_ = std::move(m);
    return s;
  }
  bool subset_of(const NodeSet& other) const {
    return std::includes(other.v_.begin(), other.v_.end(), v_.begin(),
                         v_.end());
  }
  bool disjoint_from(const NodeSet& other) const {
    return intersect(other).empty();
  }
  bool operator==(const NodeSet& other) const { return v_ == other.v_; }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  std::string to_string() const {
    std::string s = "{";
    for (size_t i = 0; i < v_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(v_[i]);
    }
    return s + "}";
  }

 private:
  std::vector<Node> v_;
};

// Probability distribution over n nodes; entries nonnegative, sum 1.
struct Distribution {
  std::vector<double> w;

  Distribution() = default;
  explicit Distribution(std::vector<double> weights) : w(std::move(weights)) {
    validate();
  }
  static Distribution point(int n, Node i) {
    std::vector<double> w(static_cast<size_t>(n), 0.0);
    w.at(static_cast<size_t>(i)) = 1.0;
    return Distribution(std::move(w));
  }
  static Distribution uniform(int n) {
    return Distribution(
        std::vector<double>(static_cast<size_t>(n), 1.0 / n));
  }
  int size() const { return static_cast<int>(w.size()); }
  double operator[](int i) const { return w[static_cast<size_t>(i)]; }

  void validate() const {
    double sum = 0.0;
    for (double x : w) {
      if (x < 0.0 || x > 1.0 + 1e-12)
        throw ValidationError("Distribution: entry outside [0,1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("Distribution: weights sum to " +
                            std::to_string(sum) + ", expected 1");
  }
};

// Generic Monte-Carlo estimate with a 95% confidence half-width.
struct Estimate {
  double value = 0.0;
  double half_width = 0.0;
  long samples = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Seedable generator with hand-rolled real draws so that streams are
// bit-identical across standard library implementations. Independent
// streams are derived from a master seed by index.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(detail::splitmix64(seed)) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
    return Rng(detail::splitmix64(master_seed ^
                                  (0x6a09e667f3bcc909ULL + index)));
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  int uniform_int(int n) {
    return static_cast<int>(eng_() % static_cast<std::uint64_t>(n));
  }
  // Exponential(1); the log argument is bounded away from zero.
  double exponential() { return -std::log(1.0 - uniform()); }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
};

// Draw a uniform point from the probability simplex via normalized
// exponential variates.
inline std::vector<double> sample_simplex(int n, Rng& rng) {
  std::vector<double> x(static_cast<size_t>(n));
  double sum = 0.0;
  for (auto& v : x) {
    v = rng.exponential();
    sum += v;
  }
  for (auto& v : x) v /= sum;
  return x;
}

}  // namespace walkopt
