// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coevo/coevo.hpp"

using namespace coevo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_real(v); }

// Shared corpus of assembled matrices for criteria 1-3.
struct Instance {
  ModelParams params;
  AugmentedState z;
};

std::vector<Instance> matrix_corpus() {
  constexpr std::size_t kCorpus = 12000;
  std::mt19937_64 gen(20240601);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<Instance> out;
  out.reserve(kCorpus);
  for (std::size_t k = 0; k < kCorpus; ++k) {
    const std::size_t n = 1 + k % 10;
    ModelParams p{n, u(gen), u(gen)};
    if (k % 50 == 0) p.phi = 0.0;
    if (k % 50 == 25) p.phi = 1.0;
    // Half the corpus uses small thresholds so isolated agents are common.
    if (k % 2) p.epsilon *= 0.2;
    PopulationState s{0, std::vector<double>(n), std::vector<double>(n)};
    for (auto& v : s.x) v = u(gen);
    for (auto& v : s.y) v = u(gen);
    if (k % 3 == 0) s.y = s.x;
    AugmentedState z = (k % 4 == 0) ? lift(s.x, s.y, 1) : bootstrap(s, p);
    out.push_back({p, std::move(z)});
  }
  return out;
}

const std::vector<Instance>& corpus() {
  static const std::vector<Instance> c = matrix_corpus();
  return c;
}

Outcome row_stochastic() {
  std::size_t bad = 0;
  double worst = 0.0;
  for (const auto& inst : corpus()) {
    const auto r = check_row_stochastic(assemble_state_matrix(inst.z, inst.params), 1e-12);
    if (!r.ok) ++bad;
    worst = std::max(worst, r.max_deviation);
  }
  return {bad == 0, std::to_string(corpus().size()) + " matrices, " + std::to_string(bad) +
                        " violations, max row-sum deviation " + fmt(worst)};
}

Outcome coefficient_bounds_hold() {
  const auto ref = coefficient_bounds({10, 0.3, 0.5});
  const bool closed_form = std::abs(ref.alpha - 0.025) < 1e-15 && std::abs(ref.beta - 0.05) < 1e-15;
  std::size_t checked = 0, bad = 0;
  for (const auto& inst : corpus()) {
    if (!(inst.params.phi > 0.01 && inst.params.phi < 0.99)) continue;
    ++checked;
    const auto r = verify_bounds(assemble_state_matrix(inst.z, inst.params), coefficient_bounds(inst.params));
    bad += r.violations.size();
  }
  return {closed_form && bad == 0 && checked >= 10000,
          std::to_string(checked) + " matrices, " + std::to_string(bad) +
              " entries below alpha/beta; n=10 phi=0.5 gives alpha=" + fmt(ref.alpha) +
              " beta=" + fmt(ref.beta)};
}

Outcome structure_dichotomy() {
  std::size_t checked = 0, other = 0, biconditional = 0, sink_cases = 0;
  for (const auto& inst : corpus()) {
    if (!(inst.params.phi > 0.0 && inst.params.phi < 1.0)) continue;
    ++checked;
    const auto r = analyze(inst.z, inst.params);
    if (r.cls == StructureClass::Other) ++other;
    if (r.cls == StructureClass::SinkPlusSingletonSources) ++sink_cases;
    const bool strongly = r.scc.components.size() == 1;
    if (strongly != r.partition.theta.empty()) ++biconditional;
  }
  return {other == 0 && biconditional == 0 && checked >= 10000,
          std::to_string(checked) + " structures (" + std::to_string(sink_cases) +
              " with leaders): Other=" + std::to_string(other) +
              ", biconditional failures=" + std::to_string(biconditional)};
}

Outcome representation_equivalence() {
  std::mt19937_64 gen(424242);
  std::uniform_real_distribution<double> u(0, 1);
  double worst = 0.0;
  constexpr int kRuns = 120;
  for (int k = 0; k < kRuns; ++k) {
    const std::size_t n = 1 + k % 10;
    ModelParams p{n, u(gen) * 0.5, u(gen)};
    if (k % 10 == 0) p.phi = 0.0;
    if (k % 10 == 5) p.phi = 1.0;
    PopulationState s{0, std::vector<double>(n), std::vector<double>(n)};
    for (auto& v : s.x) v = u(gen);
    for (auto& v : s.y) v = u(gen);
    if (k % 2) s.y = s.x;
    worst = std::max(worst, compare_direct_vs_matrix(simulate(p, s, 50, {false})));
  }
  return {worst <= 1e-12, std::to_string(kRuns) + " trajectories, horizon 50, max deviation " + fmt(worst)};
}

Outcome cut_balance_vs_connectivity() {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(0, 1);
  std::size_t strongly = 0, sc_failures = 0, attempts = 0;
  while (strongly < 500) {
    ++attempts;
    const std::size_t n = 2 + attempts % 9;  // 2..10 nodes
    const double density = 0.15 + 0.5 * u(gen);
    Digraph g(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (u(gen) < density) g.add_edge(a, b);
    if (strongly_connected_components(g).components.size() != 1) continue;
    ++strongly;
    if (!cut_balance_exhaustive(g).balanced) ++sc_failures;
  }
  std::size_t leader_cases = 0, balanced_with_leaders = 0;
  while (leader_cases < 500) {
    const std::size_t n = 1 + leader_cases % 5;
    const ModelParams p{n, 0.02 + 0.2 * u(gen), 0.01 + 0.98 * u(gen)};
    AugmentedState z{1, std::vector<double>(2 * n)};
    for (auto& v : z.z) v = u(gen);
    if (omega_theta_partition(z, p).theta.empty()) continue;
    ++leader_cases;
    if (cut_balance_exhaustive(digraph_of(assemble_state_matrix(z, p))).balanced) ++balanced_with_leaders;
  }
  return {sc_failures == 0 && balanced_with_leaders == 0,
          std::to_string(strongly) + " strongly connected digraphs: " + std::to_string(sc_failures) +
              " not cut-balanced; " + std::to_string(leader_cases) + " leader digraphs: " +
              std::to_string(balanced_with_leaders) + " cut-balanced"};
}

Outcome norm_conformity() {
  std::size_t runs = 0, failures = 0, frozen = 0, attracted = 0;
  double worst_action = 0.0, worst_decay = 0.0;
  for (std::size_t n : {2, 5, 10}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RunConfig cfg;
      cfg.params = {n, 0.1, 0.0};
      cfg.seed = seed;
      cfg.horizon = 50;
      const auto traj = simulate(cfg.params, initial_state(cfg), cfg.horizon, {false});
      const auto r = verify_norm_conformity(traj);
      ++runs;
      if (!r.ok()) ++failures;
      frozen += r.frozen.size();
      attracted += r.attracted.size();
      worst_action = std::max(worst_action, r.max_action_deviation);
      worst_decay = std::max(worst_decay, r.max_decay_error);
    }
  }
  return {failures == 0 && frozen > 0 && attracted > 0,
          std::to_string(runs) + " runs, " + std::to_string(failures) + " failures (" +
              std::to_string(frozen) + " frozen / " + std::to_string(attracted) +
              " attracted agents); max action deviation " + fmt(worst_action) +
              ", max decay error " + fmt(worst_decay)};
}

Outcome hk_reduction() {
  std::size_t runs = 0, mismatches = 0, gap_failures = 0, unconverged = 0;
  double worst = 0.0;
  for (double eps : {0.05, 0.3}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RunConfig cfg;
      cfg.params = {10, eps, 1.0};
      cfg.seed = seed;
      const auto init = initial_state(cfg);
      const auto traj = simulate(cfg.params, init, 60, {false});
      const auto hk = hk_simulate(init.x, eps, 1000);
      ++runs;
      if (!hk.converged_at) ++unconverged;
      if (!hk.gaps_exceed_epsilon) ++gap_failures;
      double dev = 0.0;
      for (std::size_t t = 0; t < traj.states.size(); ++t) {
        const auto& ref = hk.trajectory[std::min(t, hk.trajectory.size() - 1)];
        for (std::size_t i = 0; i < 10; ++i) dev = std::max(dev, std::abs(traj.states[t].x[i] - ref[i]));
      }
      if (dev > 1e-12) ++mismatches;
      worst = std::max(worst, dev);
    }
  }
  return {mismatches == 0 && gap_failures == 0 && unconverged == 0,
          std::to_string(runs) + " runs: max deviation " + fmt(worst) + ", " +
              std::to_string(gap_failures) + " fixed points with a cluster gap <= epsilon, " +
              std::to_string(unconverged) + " unconverged"};
}

RunConfig scenario(double eps, std::uint64_t seed) {
  RunConfig cfg;
  cfg.params = {10, eps, 0.5};
  cfg.seed = seed;
  cfg.horizon = 200;
  return cfg;
}

// Gates pre-registered from a pilot batch on seeds 1000..1049 (disjoint from
// the acceptance seeds 1..50): epsilon=0.3 gave 50/50 Consensus and 50/50
// stabilized; epsilon=0.05 gave 50/50 Clustering, worst containment residual 0.
constexpr double kConsensusShareGate = 0.80;
constexpr double kStabilizedShareGate = 0.95;

Outcome scenario_consensus() {
  std::size_t consensus = 0, stabilized = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto r = execute(scenario(0.3, seed)).report;
    if (r.regime == Regime::Consensus && r.spread < 1e-9) ++consensus;
    if (r.stabilization_time) ++stabilized;
  }
  return {consensus >= kConsensusShareGate * 50 && stabilized >= kStabilizedShareGate * 50,
          std::to_string(consensus) + "/50 Consensus (gate 80%), " + std::to_string(stabilized) +
              "/50 stabilized (gate 95%)"};
}

Outcome scenario_clustering() {
  std::size_t clustering = 0, bad_residual = 0, bad_drift = 0, spanning = 0, escaped = 0;
  double worst_residual = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto run = execute(scenario(0.05, seed));
    const auto& r = run.report;
    if (r.regime != Regime::Clustering || r.leaders.empty()) continue;
    ++clustering;
    worst_residual = std::max(worst_residual, *r.containment_residual);
    if (!(*r.containment_residual < 1e-6)) ++bad_residual;
    if (r.leader_drift > 1e-12) ++bad_drift;
    const auto& zT = run.trajectory.z(*r.stabilization_time).z;
    const auto [lo, hi] = std::minmax_element(zT.begin(), zT.end());
    if (*lo == r.hull->lo && *hi == r.hull->hi) {
      ++spanning;
      for (std::size_t j = 0; j < r.limit_values.size(); ++j)
        if (hull_distance(r.limit_values[j], *r.hull) > 0.0) ++escaped;
    }
  }
  return {clustering > 25 && bad_residual == 0 && bad_drift == 0 && escaped == 0,
          std::to_string(clustering) + "/50 Clustering with leaders; worst residual " +
              fmt(worst_residual) + "; " + std::to_string(bad_drift) + " leader drifts; " +
              std::to_string(spanning) + " runs with leaders spanning z(T), " +
              std::to_string(escaped) + " follower limits outside the hull"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "coevo_acceptance_determinism";
  fs::remove_all(root);
  std::size_t differing = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    RunConfig cfg = scenario(0.3, seed);
    cfg.outputs.trajectory_csv = false;
    cfg.outputs.graphs_dot = false;
    const auto a = write_run_outputs(cfg, execute(cfg), root / "a");
    const auto b = write_run_outputs(cfg, execute(cfg), root / "b");
    if (slurp(a / "report.json") != slurp(b / "report.json") || slurp(a / "report.json").empty())
      ++differing;
  }
  SweepConfig sweep;
  sweep.base = scenario(0.3, 1);
  sweep.epsilon_grid = {0.05, 0.3};
  sweep.phi_grid = {0.5};
  for (std::uint64_t s = 1; s <= 50; ++s) sweep.seeds.push_back(s);
  const auto parallel = sweep_rows(sweep, 8);
  std::vector<std::string> serial;
  for (const auto& cell : sweep_cells(sweep)) {
    const auto cfg = cell_config(sweep, cell);
    serial.push_back(phase_map_row(cfg, execute(cfg).report));
  }
  fs::remove_all(root);
  return {differing == 0 && parallel == serial,
          std::to_string(differing) + "/50 report files differ between repeats; sweep rows " +
              (parallel == serial ? "identical" : "DIFFER") + " (" + std::to_string(serial.size()) +
              " cells, 8 threads vs serial)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1  row-stochastic P(t)", row_stochastic},
      {"C2  coefficient lower bounds", coefficient_bounds_hold},
      {"C3  structure dichotomy", structure_dichotomy},
      {"C4  direct vs matrix dynamics", representation_equivalence},
      {"C5  cut balance vs strong connectivity", cut_balance_vs_connectivity},
      {"C6  norm conformity at phi=0", norm_conformity},
      {"C7  HK reduction at phi=1", hk_reduction},
      {"C8  consensus scenario (eps=0.3)", scenario_consensus},
      {"C9  clustering scenario (eps=0.05)", scenario_clustering},
      {"C10 determinism", determinism},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << " -- " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << (failed ? "FAILED " : "all criteria passed ") << "(" << failed << " failing, "
            << fmt(secs) << " s)\n";
  return failed ? 1 : 0;
}
