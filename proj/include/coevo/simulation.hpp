#pragma once

// Trajectory runner, structure-stabilization detection and regime
// classification (consensus, leader-driven clustering, norm conformity).

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "coevo/graph.hpp"
#include "coevo/model.hpp"
#include "coevo/state_matrix.hpp"

namespace coevo {

inline constexpr std::size_t kDefaultHorizon = 200;
inline constexpr double kEquivalenceTolerance = 1e-12;

struct Tolerances {
  double consensus = 1e-9;    // spread of z at horizon
  double containment = 1e-6;  // follower distance to the leader hull at horizon
  std::size_t window = 10;    // minimum run of identical SCC partitions
};

struct Trajectory {
  ModelParams params;
  std::vector<PopulationState> states;       // t = 0..horizon
  std::vector<AugmentedState> augmented;     // t = 1..horizon
  std::vector<StructureReport> structures;   // t = 1..horizon-1

  [[nodiscard]] std::size_t horizon() const { return states.empty() ? 0 : states.size() - 1; }
  [[nodiscard]] const AugmentedState& z(std::size_t t) const { return augmented.at(t - 1); }
  [[nodiscard]] const StructureReport& structure(std::size_t t) const {
    return structures.at(t - 1);
  }
};

struct SimulateOptions {
  bool record_structures = true;
};

struct Hull {
  double lo = 0.0;
  double hi = 0.0;
};

enum class Regime { Consensus, Clustering, NormConformity, NotStabilized };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Consensus: return "Consensus";
    case Regime::Clustering: return "Clustering";
    case Regime::NormConformity: return "NormConformity";
    case Regime::NotStabilized: return "NotStabilized";
  }
  return "NotStabilized";
}

struct NormConformityReport {
  bool actions_ok = true;   // y_i(t) == y_avg(0) for t >= 1
  bool frozen_ok = true;    // isolated agents keep x_i(1)
  bool decay_ok = true;     // attracted agents' gap shrinks by exactly 1/n per step
  double max_action_deviation = 0.0;
  double max_frozen_deviation = 0.0;
  double max_decay_error = 0.0;  // |gap(t+1) - gap(t)/n|, worst case over agents and steps
  double reference_action = 0.0;
  std::vector<std::size_t> frozen;
  std::vector<std::size_t> attracted;

  [[nodiscard]] bool ok() const { return actions_ok && frozen_ok && decay_ok; }
};

struct HkReductionReport {
  bool applicable = false;        // phi == 1
  double max_deviation = 0.0;     // coevolution x(t) vs HK iterates from x(1)
  std::size_t hk_clusters = 0;
};

struct SimulationReport {
  Regime regime = Regime::NotStabilized;
  std::optional<std::size_t> stabilization_time;
  std::optional<double> consensus_value;
  std::vector<std::size_t> leaders;
  std::optional<Hull> hull;
  std::optional<double> containment_residual;
  std::vector<double> containment_tail;  // residual at t = T..horizon
  double leader_drift = 0.0;             // max |z_i(t) - z_i(T)| over leaders, t >= T
  double spread = 0.0;                   // max z(horizon) - min z(horizon)
  std::vector<std::size_t> cluster_assignment;
  std::size_t cluster_count = 0;
  std::vector<double> limit_values;
  std::optional<NormConformityReport> norm_conformity;
  std::optional<HkReductionReport> hk;
  std::vector<std::string> diagnostics;
};

inline double spread(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

inline double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double hull_distance(double value, const Hull& hull) {
  if (value < hull.lo) return hull.lo - value;
  if (value > hull.hi) return value - hull.hi;
  return 0.0;
}

inline Trajectory simulate(const ModelParams& params, const PopulationState& initial,
                           std::size_t horizon, const SimulateOptions& options = {}) {
  if (horizon < 2) throw std::invalid_argument("simulate: horizon must be >= 2");
  validate_state(initial, params);
  Trajectory traj;
  traj.params = params;
  traj.states.reserve(horizon + 1);
  traj.augmented.reserve(horizon);
  traj.states.push_back(initial);
  traj.states.back().t = 0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    traj.states.push_back(step(traj.states.back(), params));
    traj.augmented.push_back(lift(traj.states[t].x, traj.states[t - 1].y, t));
  }
  if (options.record_structures) {
    traj.structures.reserve(horizon - 1);
    for (std::size_t t = 1; t < horizon; ++t) traj.structures.push_back(analyze(traj.z(t), params));
  }
  return traj;
}

// Iterates the matrix recursion from z(1) and reports the worst elementwise gap
// to the directly simulated augmented states.
inline double compare_direct_vs_matrix(const Trajectory& traj) {
  if (traj.augmented.empty()) return 0.0;
  double worst = 0.0;
  AugmentedState z = traj.augmented.front();
  for (std::size_t k = 1; k < traj.augmented.size(); ++k) {
    z = matrix_step(z, traj.params);
    const auto& direct = traj.augmented[k].z;
    for (std::size_t i = 0; i < direct.size(); ++i)
      worst = std::max(worst, std::abs(direct[i] - z.z[i]));
  }
  return worst;
}

// Smallest T such that the canonical SCC partition is identical on every
// recorded step from T to the end, provided that run spans >= window steps.
inline std::optional<std::size_t> detect_stabilization(std::span<const StructureReport> structures,
                                                       std::size_t window) {
  if (window < 1) throw std::invalid_argument("detect_stabilization: window must be >= 1");
  if (structures.empty()) return std::nullopt;
  const auto& last = structures.back().scc.components;
  std::size_t start = structures.size() - 1;
  while (start > 0 && structures[start - 1].scc.components == last) --start;
  if (structures.size() - start < window) return std::nullopt;
  return structures[start].t;
}

inline NormConformityReport verify_norm_conformity(const Trajectory& traj) {
  const ModelParams& p = traj.params;
  if (p.phi != 0.0) throw std::invalid_argument("verify_norm_conformity: requires phi == 0");
  if (traj.states.size() < 2) throw std::invalid_argument("verify_norm_conformity: trajectory too short");
  // Relative decay error with an absolute floor at the rounding level of values in [0,1].
  constexpr double kRelative = 1e-12;
  constexpr double kRoundingFloor = 64 * DBL_EPSILON;

  NormConformityReport r;
  r.reference_action = average_action(traj.states.front());
  const double ref = r.reference_action;
  const double n = static_cast<double>(p.n);
  const auto& first = traj.states[1];
  for (std::size_t i = 0; i < p.n; ++i)
    (std::abs(first.x[i] - ref) > p.epsilon ? r.frozen : r.attracted).push_back(i);

  for (std::size_t t = 1; t < traj.states.size(); ++t) {
    const auto& s = traj.states[t];
    for (double y : s.y) r.max_action_deviation = std::max(r.max_action_deviation, std::abs(y - ref));
    for (std::size_t i : r.frozen)
      r.max_frozen_deviation = std::max(r.max_frozen_deviation, std::abs(s.x[i] - first.x[i]));
    if (t + 1 >= traj.states.size()) continue;
    const auto& next = traj.states[t + 1];
    for (std::size_t i : r.attracted) {
      const double expected = (s.x[i] - ref) / n;
      const double err = std::abs((next.x[i] - ref) - expected);
      r.max_decay_error = std::max(r.max_decay_error, err);
      if (err > kRelative * std::abs(expected) + kRoundingFloor) r.decay_ok = false;
    }
  }
  r.actions_ok = r.max_action_deviation <= kEquivalenceTolerance;
  r.frozen_ok = r.max_frozen_deviation == 0.0;
  return r;
}

struct HkResult {
  std::vector<std::vector<double>> trajectory;
  std::optional<std::size_t> converged_at;  // first t with x(t+1) == x(t)
  std::vector<double> cluster_values;       // distinct equilibrium values, ascending
  bool gaps_exceed_epsilon = true;
  double min_gap = 0.0;
};

inline HkResult hk_simulate(const std::vector<double>& x0, double epsilon, std::size_t max_steps) {
  detail::require_unit_range(x0, "hk_simulate");
  HkResult r;
  r.trajectory.push_back(x0);
  for (std::size_t t = 0; t < max_steps; ++t) {
    auto next = hk_step(r.trajectory.back(), epsilon);
    if (next == r.trajectory.back()) {
      r.converged_at = t;
      break;
    }
    r.trajectory.push_back(std::move(next));
  }
  r.cluster_values = r.trajectory.back();
  std::sort(r.cluster_values.begin(), r.cluster_values.end());
  r.cluster_values.erase(std::unique(r.cluster_values.begin(), r.cluster_values.end()),
                         r.cluster_values.end());
  r.min_gap = r.cluster_values.size() > 1 ? 1.0 : 0.0;
  for (std::size_t k = 1; k < r.cluster_values.size(); ++k) {
    const double gap = r.cluster_values[k] - r.cluster_values[k - 1];
    r.min_gap = std::min(r.min_gap, gap);
    if (!(gap > epsilon)) r.gaps_exceed_epsilon = false;
  }
  return r;
}

// Edge present iff the entry is positive in every matrix of the window.
inline Digraph limiting_digraph(std::span<const StateMatrix> window) {
  if (window.empty()) throw std::invalid_argument("limiting_digraph: empty window");
  const std::size_t dim = window.front().dim();
  Digraph g(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const bool always = std::all_of(window.begin(), window.end(),
                                      [&](const StateMatrix& P) { return P(i, j) > 0.0; });
      if (always) g.add_edge(j, i, window.back()(i, j));
    }
  }
  return g;
}

inline std::vector<StateMatrix> tail_matrices(const Trajectory& traj, std::size_t count) {
  std::vector<StateMatrix> out;
  const std::size_t last = traj.horizon() - 1;  // P(t) is recorded for t = 1..horizon-1
  const std::size_t first = last + 1 > count ? last + 1 - count : 1;
  for (std::size_t t = first; t <= last; ++t)
    out.push_back(assemble_state_matrix(traj.z(t), traj.params));
  return out;
}

namespace detail {

// Followers are chained by value gaps below `gap`; every leader is its own cluster.
inline std::vector<std::size_t> assign_clusters(std::span<const double> values,
                                                std::span<const std::size_t> leaders, double gap,
                                                std::size_t& count) {
  const std::size_t m = values.size();
  std::vector<bool> is_leader(m, false);
  for (std::size_t l : leaders) is_leader[l] = true;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] != values[b] ? values[a] < values[b] : a < b;
  });
  std::vector<std::size_t> id(m, 0);
  count = 0;
  std::optional<double> prev_follower;
  std::size_t follower_cluster = 0;
  for (std::size_t v : order) {
    if (is_leader[v]) {
      id[v] = count++;
      continue;
    }
    if (!prev_follower || values[v] - *prev_follower >= gap) follower_cluster = count++;
    id[v] = follower_cluster;
    prev_follower = values[v];
  }
  return id;
}

}  // namespace detail

inline SimulationReport classify_regime(const Trajectory& traj, std::optional<std::size_t> T,
                                        const Tolerances& tol = {}) {
  const ModelParams& p = traj.params;
  if (traj.augmented.empty()) throw std::invalid_argument("classify_regime: empty trajectory");
  SimulationReport r;
  r.stabilization_time = T;
  const auto& final_z = traj.augmented.back().z;
  r.limit_values = final_z;
  r.spread = spread(final_z);

  for (const auto& s : traj.structures)
    if (s.cls == StructureClass::Other && p.phi > 0.0 && p.phi < 1.0)
      r.diagnostics.push_back("structure class Other at t=" + std::to_string(s.t) +
                              ": leader/follower dichotomy violated");

  auto finish = [&](std::vector<std::size_t> leaders) {
    r.leaders = std::move(leaders);
    r.cluster_assignment =
        detail::assign_clusters(final_z, r.leaders, 10.0 * tol.consensus, r.cluster_count);
    return r;
  };

  if (p.phi == 0.0) {
    r.regime = Regime::NormConformity;
    r.norm_conformity = verify_norm_conformity(traj);
    if (!r.norm_conformity->ok()) r.diagnostics.push_back("norm-conformity closed form violated");
    return finish({});
  }

  if (p.phi == 1.0) {
    // Actions copy opinions from t = 1 on, so x follows HK iterates started at x(1).
    HkReductionReport hk;
    hk.applicable = true;
    std::vector<double> x = traj.states[1].x;
    for (std::size_t t = 1; t < traj.states.size(); ++t) {
      for (std::size_t i = 0; i < x.size(); ++i)
        hk.max_deviation = std::max(hk.max_deviation, std::abs(traj.states[t].x[i] - x[i]));
      x = hk_step(x, p.epsilon);
    }
    auto values = traj.states.back().x;
    std::sort(values.begin(), values.end());
    hk.hk_clusters = static_cast<std::size_t>(
        std::distance(values.begin(), std::unique(values.begin(), values.end())));
    r.hk = hk;
    if (hk.max_deviation > kEquivalenceTolerance)
      r.diagnostics.push_back("coevolution with phi=1 departed from the HK iterates");
    if (r.spread < tol.consensus) {
      r.regime = Regime::Consensus;
      r.consensus_value = mean(final_z);
    } else {
      r.regime = Regime::Clustering;
    }
    return finish({});
  }

  if (!T) {
    r.regime = Regime::NotStabilized;
    return finish({});
  }

  const StructureReport& settled = traj.structure(*T);
  switch (settled.cls) {
    case StructureClass::StronglyConnected:
      if (r.spread < tol.consensus) {
        r.regime = Regime::Consensus;
        r.consensus_value = mean(final_z);
      } else {
        r.regime = Regime::NotStabilized;
        r.diagnostics.push_back("structure settled strongly connected but spread " +
                                std::to_string(r.spread) + " is above the consensus tolerance");
      }
      return finish({});

    case StructureClass::SinkPlusSingletonSources: {
      r.regime = Regime::Clustering;
      const auto& leaders = settled.partition.theta;
      const auto& zT = traj.z(*T).z;
      Hull h{1.0, 0.0};
      for (std::size_t l : leaders) {
        h.lo = std::min(h.lo, zT[l]);
        h.hi = std::max(h.hi, zT[l]);
      }
      r.hull = h;
      for (std::size_t t = *T; t <= traj.horizon(); ++t) {
        const auto& zt = traj.z(t).z;
        for (std::size_t l : leaders)
          r.leader_drift = std::max(r.leader_drift, std::abs(zt[l] - zT[l]));
        double worst = 0.0;
        for (std::size_t j : settled.partition.omega)
          worst = std::max(worst, hull_distance(zt[j], h));
        r.containment_tail.push_back(worst);
      }
      r.containment_residual = r.containment_tail.back();
      if (*r.containment_residual >= tol.containment)
        r.diagnostics.push_back("followers not yet inside the leader hull at horizon");
      return finish(leaders);
    }

    case StructureClass::Other:
      r.regime = Regime::NotStabilized;
      r.diagnostics.push_back("settled structure is neither strongly connected nor sink plus "
                              "singleton sources");
      return finish({});
  }
  return r;
}

inline SimulationReport run_and_classify(const ModelParams& params, const PopulationState& initial,
                                         std::size_t horizon, const Tolerances& tol,
                                         Trajectory* keep = nullptr) {
  Trajectory traj = simulate(params, initial, horizon);
  auto T = detect_stabilization(traj.structures, tol.window);
  SimulationReport r = classify_regime(traj, T, tol);
  if (keep) *keep = std::move(traj);
  return r;
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results land at index i,
// so the output is identical to a serial loop.
template <typename Result>
std::vector<Result> parallel_map(std::size_t count, std::size_t jobs,
                                 const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> out(count);
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < count; i = next++) out[i] = fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace coevo
