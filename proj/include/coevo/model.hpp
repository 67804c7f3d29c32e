#pragma once

// Agent-level opinion/action dynamics and the classical HK baseline.

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace coevo {

struct ModelParams {
  std::size_t n = 1;
  double epsilon = 0.0;  // confidence threshold
  double phi = 0.0;      // decision weight on own opinion

  void validate() const {
    if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0))
      throw std::invalid_argument("ModelParams: epsilon must lie in [0,1]");
    if (!(phi >= 0.0 && phi <= 1.0))
      throw std::invalid_argument("ModelParams: phi must lie in [0,1]");
  }
};

struct PopulationState {
  std::size_t t = 0;
  std::vector<double> x;  // opinions
  std::vector<double> y;  // actions

  bool operator==(const PopulationState&) const = default;
};

// sets[i] lists the j != i with |x_i - y_j| <= epsilon, ascending.
struct NeighborSets {
  std::size_t t = 0;
  std::vector<std::vector<std::size_t>> sets;

  [[nodiscard]] bool isolated(std::size_t i) const { return sets[i].empty(); }
};

namespace detail {

inline void require_length(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n)
    throw std::invalid_argument(std::string(what) + ": expected length " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
}

inline void require_unit_range(const std::vector<double>& v, const char* what) {
  for (double e : v)
    if (!(e >= 0.0 && e <= 1.0))
      throw std::invalid_argument(std::string(what) + ": entries must lie in [0,1]");
}

inline void check_state(const PopulationState& s, const ModelParams& p) {
  require_length(s.x, p.n, "opinions");
  require_length(s.y, p.n, "actions");
}

}  // namespace detail

inline void validate_state(const PopulationState& s, const ModelParams& p) {
  p.validate();
  detail::check_state(s, p);
  detail::require_unit_range(s.x, "opinions");
  detail::require_unit_range(s.y, "actions");
}

inline double average_action(const PopulationState& s) {
  if (s.y.empty()) throw std::invalid_argument("average_action: empty population");
  return std::accumulate(s.y.begin(), s.y.end(), 0.0) / static_cast<double>(s.y.size());
}

// Neighbor rule compares an agent's opinion against the others' actions. The
// comparison at exactly epsilon is inclusive.
inline NeighborSets neighbor_sets(const std::vector<double>& x, const std::vector<double>& y,
                                  double epsilon, std::size_t t = 0) {
  if (x.size() != y.size()) throw std::invalid_argument("neighbor_sets: |x| != |y|");
  NeighborSets out{t, std::vector<std::vector<std::size_t>>(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      if (j != i && std::abs(x[i] - y[j]) <= epsilon) out.sets[i].push_back(j);
  return out;
}

inline NeighborSets neighbor_sets(const PopulationState& s, const ModelParams& p) {
  detail::check_state(s, p);
  return neighbor_sets(s.x, s.y, p.epsilon, s.t);
}

inline std::vector<double> update_opinions(const PopulationState& s, const NeighborSets& nbrs,
                                           const ModelParams& p) {
  detail::check_state(s, p);
  if (nbrs.sets.size() != p.n) throw std::invalid_argument("update_opinions: neighbor set count");
  std::vector<double> next(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const auto& nb = nbrs.sets[i];
    if (nb.empty()) {
      next[i] = s.x[i];
      continue;
    }
    double sum = 0.0;
    for (std::size_t j : nb) sum += s.y[j];
    next[i] = (sum + s.x[i]) / static_cast<double>(nb.size() + 1);
  }
  return next;
}

inline std::vector<double> update_actions(const std::vector<double>& x_next,
                                          const PopulationState& s, const ModelParams& p) {
  detail::check_state(s, p);
  detail::require_length(x_next, p.n, "update_actions: x_next");
  const double pull = (1.0 - p.phi) * average_action(s);
  std::vector<double> next(p.n);
  for (std::size_t i = 0; i < p.n; ++i) next[i] = p.phi * x_next[i] + pull;
  return next;
}

// One synchronous update: opinions first, then actions from the new opinions
// and the previous average action.
inline PopulationState step(const PopulationState& s, const ModelParams& p) {
  const NeighborSets nbrs = neighbor_sets(s, p);
  PopulationState next;
  next.t = s.t + 1;
  next.x = update_opinions(s, nbrs, p);
  next.y = update_actions(next.x, s, p);
  return next;
}

// Classical Hegselmann-Krause update; the neighbor set includes the agent itself.
inline std::vector<double> hk_step(const std::vector<double>& x, double epsilon) {
  std::vector<double> next(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double sum = 0.0;
    std::size_t count = 0;
    bool uniform = true;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (std::abs(x[i] - x[j]) <= epsilon) {
        sum += x[j];
        ++count;
        uniform = uniform && x[j] == x[i];
      }
    }
    // The mean of identical values is that value; summing would drift by an ulp
    // and break exact fixed-point detection.
    next[i] = uniform ? x[i] : sum / static_cast<double>(count);
  }
  return next;
}

}  // namespace coevo
