#pragma once

// Test-only reference computations. These deliberately avoid the library's
// code paths: scalar long-double formulas, transitive closure instead of
// Tarjan, subset enumeration over std::vector<bool>.

#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Pairs = std::set<std::pair<std::size_t, std::size_t>>;

// {(i, j) : j != i, |x_i - y_j| <= eps}
inline Pairs neighbor_pairs(const std::vector<double>& x, const std::vector<double>& y, double eps) {
  Pairs out;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      const long double d = static_cast<long double>(x[i]) - static_cast<long double>(y[j]);
      if (i != j && (d < 0 ? -d : d) <= static_cast<long double>(eps)) out.insert({i, j});
    }
  return out;
}

struct Step {
  std::vector<long double> x, y;
};

inline Step coevolution_step(const std::vector<double>& x, const std::vector<double>& y, double eps,
                             double phi) {
  const std::size_t n = x.size();
  const auto nb = neighbor_pairs(x, y, eps);
  long double avg = 0;
  for (double v : y) avg += v;
  avg /= n;
  Step s{std::vector<long double>(n), std::vector<long double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    long double acc = x[i];
    std::size_t count = 1;
    for (auto [a, b] : nb)
      if (a == i) {
        acc += y[b];
        ++count;
      }
    s.x[i] = acc / count;
    s.y[i] = phi * s.x[i] + (1 - static_cast<long double>(phi)) * avg;
  }
  return s;
}

// Dense P(t) straight from the entry formulas, given neighbor counts/pairs.
inline std::vector<std::vector<long double>> state_matrix(std::size_t n, const Pairs& nb, double phi) {
  std::vector<std::vector<long double>> P(2 * n, std::vector<long double>(2 * n, 0));
  std::vector<std::size_t> deg(n, 0);
  for (auto [i, j] : nb) ++deg[i];
  const long double f = phi;
  for (std::size_t i = 0; i < n; ++i) {
    P[i][i] = 1.0L / (deg[i] + 1);
    for (auto [a, b] : nb)
      if (a == i) P[i][b] = f / (deg[i] + 1);
    for (std::size_t j = 0; j < n; ++j) P[i][n + j] = (1 - f) * deg[i] / ((deg[i] + 1) * (long double)n);
    P[n + i][i] = f;
    for (std::size_t j = 0; j < n; ++j) P[n + i][n + j] = (1 - f) / n;
  }
  return P;
}

// reach[a][b]: b reachable from a (reflexive).
inline std::vector<std::vector<bool>> reachability(std::size_t n,
                                                   const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t v = 0; v < n; ++v) r[v][v] = true;
  for (auto [a, b] : edges) r[a][b] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  return r;
}

// Components as sorted vectors, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> scc(std::size_t n,
                                                 const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  const auto r = reachability(n, edges);
  std::vector<bool> taken(n, false);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (taken[v]) continue;
    std::vector<std::size_t> comp;
    for (std::size_t w = v; w < n; ++w)
      if (r[v][w] && r[w][v]) {
        comp.push_back(w);
        taken[w] = true;
      }
    out.push_back(comp);
  }
  return out;
}

inline bool cut_balanced(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 1; mask + 1 < total; ++mask) {
    std::vector<bool> in_s(n);
    for (std::size_t v = 0; v < n; ++v) in_s[v] = (mask >> v) & 1;
    bool enters = false, leaves = false;
    for (auto [a, b] : edges) {
      if (!in_s[a] && in_s[b]) enters = true;
      if (in_s[a] && !in_s[b]) leaves = true;
    }
    if (enters != leaves) return false;
  }
  return true;
}

inline std::vector<std::pair<std::size_t, std::size_t>> random_edges(std::size_t n, double density,
                                                                     std::mt19937_64& gen) {
  std::bernoulli_distribution coin(density);
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (coin(gen)) e.push_back({a, b});
  return e;
}

}  // namespace oracle
