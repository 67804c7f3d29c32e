#pragma once

// Serialization: trajectory CSV, matrix CSV, DOT snapshots and report JSON.
// Agents and nodes are 1-based in every exported file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "coevo/config.hpp"
#include "coevo/graph.hpp"
#include "coevo/simulation.hpp"
#include "coevo/state_matrix.hpp"

namespace coevo {

using ordered_json = nlohmann::ordered_json;

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

inline void close_checked(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,agent,x,y\n";
  for (const auto& s : traj.states)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      os << s.t << ',' << i + 1 << ',' << format_real(s.x[i]) << ',' << format_real(s.y[i]) << '\n';
}

inline void export_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_trajectory_csv(out, traj);
  detail::close_checked(out, path);
}

inline void write_matrix_csv(std::ostream& os, const StateMatrix& P) {
  for (std::size_t i = 0; i < P.dim(); ++i) {
    for (std::size_t j = 0; j < P.dim(); ++j) os << (j ? "," : "") << format_real(P(i, j));
    os << '\n';
  }
}

inline void export_matrix(const StateMatrix& P, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_matrix_csv(out, P);
  detail::close_checked(out, path);
}

inline void export_graph(const StructureReport& report, const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  write_dot(out, report);
  detail::close_checked(out, path);
}

inline ordered_json config_echo(const RunConfig& c) {
  ordered_json j;
  j["n"] = c.params.n;
  j["epsilon"] = c.params.epsilon;
  j["phi"] = c.params.phi;
  j["seed"] = c.seed;
  j["horizon"] = c.horizon;
  j["consensus_tolerance"] = c.tolerances.consensus;
  j["containment_tolerance"] = c.tolerances.containment;
  j["window"] = c.tolerances.window;
  j["init_mode"] = to_string(c.init_mode);
  if (c.init_mode == InitMode::Explicit) {
    j["x0"] = c.x0;
    j["y0"] = c.y0.empty() ? c.x0 : c.y0;
  }
  return j;
}

// FNV-1a over the canonical config echo; names the per-run output directory.
inline std::string config_hash(const RunConfig& c) {
  const std::string text = config_echo(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

template <typename Range>
ordered_json one_based(const Range& nodes) {
  ordered_json arr = ordered_json::array();
  for (std::size_t v : nodes) arr.push_back(v + 1);
  return arr;
}

template <typename T>
ordered_json or_null(const std::optional<T>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

}  // namespace detail

inline ordered_json report_json(const SimulationReport& r, const RunConfig& c) {
  ordered_json j;
  j["regime"] = to_string(r.regime);
  j["stabilization_time"] = detail::or_null(r.stabilization_time);
  j["consensus_value"] = detail::or_null(r.consensus_value);
  j["spread"] = r.spread;
  j["leaders"] = detail::one_based(r.leaders);
  if (r.hull)
    j["hull"] = {{"lo", r.hull->lo}, {"hi", r.hull->hi}};
  else
    j["hull"] = nullptr;
  j["containment_residual"] = detail::or_null(r.containment_residual);
  j["leader_drift"] = r.leader_drift;
  ordered_json clusters;
  clusters["count"] = r.cluster_count;
  clusters["assignment"] = r.cluster_assignment;
  j["clusters"] = clusters;
  j["limit_values"] = r.limit_values;
  if (r.norm_conformity) {
    const auto& l = *r.norm_conformity;
    ordered_json lj;
    lj["ok"] = l.ok();
    lj["reference_action"] = l.reference_action;
    lj["actions_ok"] = l.actions_ok;
    lj["frozen_ok"] = l.frozen_ok;
    lj["decay_ok"] = l.decay_ok;
    lj["max_action_deviation"] = l.max_action_deviation;
    lj["max_frozen_deviation"] = l.max_frozen_deviation;
    lj["max_decay_error"] = l.max_decay_error;
    lj["frozen_agents"] = detail::one_based(l.frozen);
    lj["attracted_agents"] = detail::one_based(l.attracted);
    j["norm_conformity"] = lj;
  }
  if (r.hk) {
    ordered_json hj;
    hj["max_deviation"] = r.hk->max_deviation;
    hj["clusters"] = r.hk->hk_clusters;
    j["hk_reduction"] = hj;
  }
  j["diagnostics"] = r.diagnostics;
  j["config"] = config_echo(c);
  return j;
}

inline void export_report(const SimulationReport& r, const RunConfig& c,
                          const std::filesystem::path& path) {
  auto out = detail::open_output(path);
  out << report_json(r, c).dump(2) << '\n';
  detail::close_checked(out, path);
}

}  // namespace coevo
