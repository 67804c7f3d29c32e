#pragma once

// The run / sweep / verify commands behind the CLI.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "coevo/config.hpp"
#include "coevo/graph.hpp"
#include "coevo/io.hpp"
#include "coevo/simulation.hpp"

namespace coevo {

struct RunResult {
  Trajectory trajectory;
  SimulationReport report;
};

inline RunResult execute(const RunConfig& cfg) {
  RunResult r;
  const PopulationState init = initial_state(cfg);
  r.report = run_and_classify(cfg.params, init, cfg.horizon, cfg.tolerances, &r.trajectory);
  return r;
}

// Writes <out>/run-<hash>/{trajectory.csv, report.json, graphs/t<k>.dot,
// matrices/t<k>.csv} according to the output flags; returns the run directory.
inline std::filesystem::path write_run_outputs(const RunConfig& cfg, const RunResult& r,
                                               const std::filesystem::path& out_root) {
  const auto dir = out_root / ("run-" + config_hash(cfg));
  std::filesystem::create_directories(dir);
  if (cfg.outputs.trajectory_csv) export_trajectory(r.trajectory, dir / "trajectory.csv");
  if (cfg.outputs.report_json) export_report(r.report, cfg, dir / "report.json");
  if (cfg.outputs.graphs_dot)
    for (const auto& s : r.trajectory.structures)
      export_graph(s, dir / "graphs" / ("t" + std::to_string(s.t) + ".dot"));
  if (cfg.outputs.matrices_csv)
    for (std::size_t t = 1; t < r.trajectory.horizon(); ++t)
      export_matrix(assemble_state_matrix(r.trajectory.z(t), cfg.params),
                    dir / "matrices" / ("t" + std::to_string(t) + ".csv"));
  return dir;
}

inline std::filesystem::path run_command(const RunConfig& cfg,
                                         const std::filesystem::path& out_root) {
  return write_run_outputs(cfg, execute(cfg), out_root);
}

struct SweepCell {
  double epsilon = 0.0;
  double phi = 0.0;
  std::uint64_t seed = 0;
};

// Canonical order: epsilon, then phi, then seed, each in configured order.
inline std::vector<SweepCell> sweep_cells(const SweepConfig& s) {
  std::vector<SweepCell> cells;
  for (double e : s.epsilon_grid)
    for (double p : s.phi_grid)
      for (auto seed : s.seeds) cells.push_back({e, p, seed});
  return cells;
}

// A cell runs with its own seed, unmixed: the cell key already contains the
// seed, so growing the grid never perturbs existing cells.
inline RunConfig cell_config(const SweepConfig& s, const SweepCell& c) {
  RunConfig cfg = s.base;
  cfg.params.epsilon = c.epsilon;
  cfg.params.phi = c.phi;
  cfg.seed = c.seed;
  return cfg;
}

inline const char* kPhaseMapHeader =
    "epsilon,phi,seed,regime,stabilization_time,cluster_count,leader_count,"
    "containment_residual,spread";

inline std::string phase_map_row(const RunConfig& cfg, const SimulationReport& r) {
  std::ostringstream os;
  os << format_real(cfg.params.epsilon) << ',' << format_real(cfg.params.phi) << ',' << cfg.seed
     << ',' << to_string(r.regime) << ',';
  if (r.stabilization_time) os << *r.stabilization_time;
  os << ',' << r.cluster_count << ',' << r.leaders.size() << ',';
  if (r.containment_residual) os << format_real(*r.containment_residual);
  os << ',' << format_real(r.spread);
  return os.str();
}

inline std::vector<std::string> sweep_rows(const SweepConfig& s, std::size_t jobs) {
  const auto cells = sweep_cells(s);
  return parallel_map<std::string>(cells.size(), jobs, [&](std::size_t i) {
    const RunConfig cfg = cell_config(s, cells[i]);
    return phase_map_row(cfg, execute(cfg).report);
  });
}

inline void write_phase_map(std::ostream& os, const std::vector<std::string>& rows) {
  os << kPhaseMapHeader << '\n';
  for (const auto& r : rows) os << r << '\n';
}

inline std::filesystem::path sweep_command(const SweepConfig& s, const std::filesystem::path& out_root,
                                           std::size_t jobs) {
  const auto rows = sweep_rows(s, jobs);
  const auto path = out_root / "phase_map.csv";
  auto out = detail::open_output(path);
  write_phase_map(out, rows);
  detail::close_checked(out, path);
  return path;
}

struct VerifyLine {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Invariant suite on one configured instance.
inline std::vector<VerifyLine> verify_command(const RunConfig& cfg) {
  const RunResult r = execute(cfg);
  const Trajectory& traj = r.trajectory;
  const ModelParams& p = cfg.params;
  const bool open_phi = p.phi > 0.0 && p.phi < 1.0;
  std::vector<VerifyLine> out;

  double worst_row = 0.0;
  bool rows_ok = true, bounds_ok = true, dichotomy_ok = true, iff_ok = true;
  std::size_t bound_violations = 0, other_count = 0, iff_failures = 0;
  const CoefficientBounds bounds = open_phi ? coefficient_bounds(p) : CoefficientBounds{};
  for (std::size_t t = 1; t < traj.horizon(); ++t) {
    const StateMatrix P = assemble_state_matrix(traj.z(t), p);
    const auto rs = check_row_stochastic(P, kEquivalenceTolerance);
    rows_ok = rows_ok && rs.ok;
    worst_row = std::max(worst_row, rs.max_deviation);
    if (!open_phi) continue;
    const auto bc = verify_bounds(P, bounds);
    bounds_ok = bounds_ok && bc.ok;
    bound_violations += bc.violations.size();
    const StructureReport& s = traj.structure(t);
    if (s.cls == StructureClass::Other) {
      dichotomy_ok = false;
      ++other_count;
    }
    const bool strongly = s.scc.components.size() == 1;
    if (strongly != s.partition.theta.empty()) {
      iff_ok = false;
      ++iff_failures;
    }
  }
  out.push_back({"row-stochastic", rows_ok, "max row-sum deviation " + format_real(worst_row)});
  if (open_phi) {
    out.push_back({"coefficient-bounds", bounds_ok,
                   std::to_string(bound_violations) + " entries below alpha/beta"});
    out.push_back({"structure-dichotomy", dichotomy_ok,
                   std::to_string(other_count) + " steps classified Other"});
    out.push_back({"connectivity-iff-no-isolated-agent", iff_ok,
                   std::to_string(iff_failures) + " mismatches"});
  }
  const double dev = compare_direct_vs_matrix(traj);
  out.push_back({"direct-vs-matrix", dev <= kEquivalenceTolerance,
                 "max deviation " + format_real(dev)});
  if (r.report.norm_conformity)
    out.push_back({"norm-conformity", r.report.norm_conformity->ok(),
                   "max decay error " + format_real(r.report.norm_conformity->max_decay_error)});
  if (r.report.hk)
    out.push_back({"hk-reduction", r.report.hk->max_deviation <= kEquivalenceTolerance,
                   "max deviation " + format_real(r.report.hk->max_deviation)});
  return out;
}

}  // namespace coevo
