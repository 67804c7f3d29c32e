#pragma once

// Interaction digraph of P(t): SCC decomposition, condensation, structure
// classification, leader/follower partition and an exhaustive cut-balance oracle.
//
// Nodes are 0-based here. Node i < n is opinion node x_{i+1}; node n + i is the
// action node y_{i+1}. An edge (j, i) means j -> i and exists iff p_ij > 0.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "coevo/state_matrix.hpp"

namespace coevo {

struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  double weight = 1.0;

  auto operator<=>(const Edge& o) const { return std::pair(from, to) <=> std::pair(o.from, o.to); }
  bool operator==(const Edge& o) const { return from == o.from && to == o.to; }
};

// Edge list kept sorted by (from, to) without duplicates.
class Digraph {
 public:
  Digraph() = default;
  explicit Digraph(std::size_t nodes) : nodes_(nodes) {}
  Digraph(std::size_t nodes, const std::vector<std::pair<std::size_t, std::size_t>>& edges)
      : nodes_(nodes) {
    for (auto [from, to] : edges) add_edge(from, to);
  }

  void add_edge(std::size_t from, std::size_t to, double weight = 1.0) {
    if (from >= nodes_ || to >= nodes_) throw std::out_of_range("Digraph::add_edge: bad node");
    const Edge e{from, to, weight};
    auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it != edges_.end() && *it == e) return;
    edges_.insert(it, e);
  }

  [[nodiscard]] std::size_t node_count() const { return nodes_; }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }

  [[nodiscard]] bool has_edge(std::size_t from, std::size_t to) const {
    return std::binary_search(edges_.begin(), edges_.end(), Edge{from, to, 0.0});
  }

  [[nodiscard]] std::vector<std::vector<std::size_t>> out_lists() const {
    std::vector<std::vector<std::size_t>> out(nodes_);
    for (const auto& e : edges_) out[e.from].push_back(e.to);
    return out;
  }

  bool operator==(const Digraph& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  std::size_t nodes_ = 0;
  std::vector<Edge> edges_;
};

struct SccPartition {
  std::vector<std::vector<std::size_t>> components;  // sorted, ordered by smallest node
  std::vector<std::size_t> component_of;

  bool operator==(const SccPartition&) const = default;
};

enum class StructureClass { StronglyConnected, SinkPlusSingletonSources, Other };

inline const char* to_string(StructureClass c) {
  switch (c) {
    case StructureClass::StronglyConnected: return "StronglyConnected";
    case StructureClass::SinkPlusSingletonSources: return "SinkPlusSingletonSources";
    case StructureClass::Other: return "Other";
  }
  return "Other";
}

struct LeaderPartition {
  std::vector<std::size_t> omega;  // action nodes and opinion nodes with neighbors
  std::vector<std::size_t> theta;  // isolated opinion nodes
};

struct StructureReport {
  std::size_t t = 0;
  std::size_t agents = 0;
  Digraph graph;
  SccPartition scc;
  Digraph condensation;
  StructureClass cls = StructureClass::Other;
  std::vector<std::size_t> leaders;  // == theta when cls is SinkPlusSingletonSources
  LeaderPartition partition;
};

struct SourcesSinks {
  std::vector<std::size_t> sources;
  std::vector<std::size_t> sinks;
};

struct CutBalanceResult {
  bool balanced = true;
  std::optional<std::vector<std::size_t>> violating_subset;
};

inline constexpr std::size_t kCutBalanceMaxNodes = 16;

inline Digraph digraph_of(const StateMatrix& P) {
  Digraph g(P.dim());
  for (std::size_t i = 0; i < P.dim(); ++i)
    for (std::size_t j = 0; j < P.dim(); ++j)
      if (P(i, j) > 0.0) g.add_edge(j, i, P(i, j));
  return g;
}

// Iterative Tarjan; components are re-ordered by their smallest member.
inline SccPartition strongly_connected_components(const Digraph& g) {
  const std::size_t n = g.node_count();
  const auto adj = g.out_lists();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_child;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t v = f.node;
      if (f.next_child < adj[v].size()) {
        const std::size_t w = adj[v][f.next_child++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }

  std::sort(comps.begin(), comps.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  SccPartition out;
  out.component_of.assign(n, 0);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (std::size_t v : comps[c]) out.component_of[v] = c;
  out.components = std::move(comps);
  return out;
}

inline Digraph condensation(const Digraph& g, const SccPartition& scc) {
  Digraph c(scc.components.size());
  for (const auto& e : g.edges()) {
    const std::size_t a = scc.component_of[e.from];
    const std::size_t b = scc.component_of[e.to];
    if (a != b) c.add_edge(a, b);
  }
  return c;
}

inline SourcesSinks sources_and_sinks(const Digraph& c) {
  std::vector<std::size_t> in(c.node_count(), 0), out(c.node_count(), 0);
  for (const auto& e : c.edges()) {
    if (e.from == e.to) throw std::invalid_argument("sources_and_sinks: condensation has a self-loop");
    ++out[e.from];
    ++in[e.to];
  }
  SourcesSinks r;
  for (std::size_t v = 0; v < c.node_count(); ++v) {
    if (in[v] == 0) r.sources.push_back(v);
    if (out[v] == 0) r.sinks.push_back(v);
  }
  return r;
}

namespace detail {

inline void require_open_phi(const ModelParams& p, const char* what) {
  if (!(p.phi > 0.0 && p.phi < 1.0))
    throw std::invalid_argument(std::string(what) + ": requires phi in the open interval (0,1)");
}

}  // namespace detail

inline LeaderPartition isolation_partition(const AugmentedState& z, const ModelParams& p) {
  const NeighborSets nbrs = augmented_neighbor_sets(z, p);
  LeaderPartition out;
  for (std::size_t i = 0; i < p.n; ++i) (nbrs.isolated(i) ? out.theta : out.omega).push_back(i);
  for (std::size_t i = 0; i < p.n; ++i) out.omega.push_back(p.n + i);
  std::sort(out.omega.begin(), out.omega.end());
  return out;
}

inline LeaderPartition omega_theta_partition(const AugmentedState& z, const ModelParams& p) {
  detail::require_open_phi(p, "omega_theta_partition");
  return isolation_partition(z, p);
}

inline StructureReport classify_structure(const Digraph& g, const AugmentedState& z,
                                          const ModelParams& p) {
  StructureReport r;
  r.t = z.t;
  r.agents = p.n;
  r.graph = g;
  r.partition = isolation_partition(z, p);
  r.scc = strongly_connected_components(g);
  r.condensation = condensation(g, r.scc);
  if (r.scc.components.size() == 1) {
    r.cls = StructureClass::StronglyConnected;
    return r;
  }
  const SourcesSinks ss = sources_and_sinks(r.condensation);
  if (ss.sinks.size() != 1) return r;
  std::vector<std::size_t> singles;
  for (std::size_t c = 0; c < r.scc.components.size(); ++c) {
    if (c == ss.sinks.front()) continue;
    const bool is_source = std::binary_search(ss.sources.begin(), ss.sources.end(), c);
    if (r.scc.components[c].size() != 1 || !is_source) return r;
    singles.push_back(r.scc.components[c].front());
  }
  std::sort(singles.begin(), singles.end());
  if (singles != r.partition.theta) return r;
  r.cls = StructureClass::SinkPlusSingletonSources;
  r.leaders = std::move(singles);
  return r;
}

inline StructureReport analyze(const AugmentedState& z, const ModelParams& p) {
  return classify_structure(digraph_of(assemble_state_matrix(z, p)), z, p);
}

// Checks every nonempty proper subset S: an edge enters S iff an edge leaves S.
inline CutBalanceResult cut_balance_exhaustive(const Digraph& g) {
  const std::size_t n = g.node_count();
  if (n > kCutBalanceMaxNodes)
    throw std::length_error("cut_balance_exhaustive: more than " +
                            std::to_string(kCutBalanceMaxNodes) +
                            " nodes; use strong connectivity as the sufficient check");
  std::vector<std::uint32_t> in_mask(n, 0), out_mask(n, 0);
  for (const auto& e : g.edges()) {
    in_mask[e.to] |= 1u << e.from;
    out_mask[e.from] |= 1u << e.to;
  }
  const std::uint32_t all = n == 0 ? 0u : static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  for (std::uint32_t s = 1; s < all; ++s) {
    const std::uint32_t rest = all & ~s;
    bool into = false, out_of = false;
    for (std::size_t v = 0; v < n; ++v) {
      if (!(s >> v & 1u)) continue;
      into = into || (in_mask[v] & rest);
      out_of = out_of || (out_mask[v] & rest);
    }
    if (into != out_of) {
      std::vector<std::size_t> subset;
      for (std::size_t v = 0; v < n; ++v)
        if (s >> v & 1u) subset.push_back(v);
      return {false, std::move(subset)};
    }
  }
  return {true, std::nullopt};
}

inline std::string node_label(std::size_t node, std::size_t agents) {
  return node < agents ? "x" + std::to_string(node + 1) : "y" + std::to_string(node - agents + 1);
}

// oo: opinion->opinion (P11), oa: opinion->action (P21), ao: action->opinion (P12),
// aa: action->action (P22).
inline const char* edge_class(const Edge& e, std::size_t agents) {
  const bool from_opinion = e.from < agents;
  const bool to_opinion = e.to < agents;
  if (from_opinion) return to_opinion ? "oo" : "oa";
  return to_opinion ? "ao" : "aa";
}

inline void write_dot(std::ostream& os, const StructureReport& r) {
  const std::size_t n = r.agents;
  std::ostringstream w;
  w.precision(17);
  os << "digraph G {\n";
  os << "  // t = " << r.t << ", structure = " << to_string(r.cls) << "\n";
  for (std::size_t v = 0; v < 2 * n; ++v) {
    os << "  " << node_label(v, n) << " [kind=" << (v < n ? "opinion" : "action");
    if (std::binary_search(r.leaders.begin(), r.leaders.end(), v))
      os << ", leader=true, color=red";
    os << "];\n";
  }
  for (const auto& e : r.graph.edges()) {
    w.str("");
    w << e.weight;
    os << "  " << node_label(e.from, n) << " -> " << node_label(e.to, n)
       << " [class=" << edge_class(e, n) << ", weight=" << w.str() << "];\n";
  }
  os << "}\n";
}

}  // namespace coevo
