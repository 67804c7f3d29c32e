#pragma once

// Augmented state z(t) = [x(t); y(t-1)] and the row-stochastic 2n x 2n matrix
// P(t) with z(t+1) = P(t) z(t), plus the coefficient-bound predicates.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "coevo/model.hpp"

namespace coevo {

struct AugmentedState {
  std::size_t t = 1;
  std::vector<double> z;

  [[nodiscard]] std::size_t agents() const { return z.size() / 2; }
  [[nodiscard]] std::span<const double> opinions() const { return {z.data(), agents()}; }
  [[nodiscard]] std::span<const double> lagged_actions() const {
    return {z.data() + agents(), agents()};
  }
};

enum class Block { P11, P12, P21, P22 };

// Dense row-major storage. Rows/columns 0..n-1 are opinion nodes, n..2n-1 action nodes.
class StateMatrix {
 public:
  StateMatrix() = default;
  StateMatrix(std::size_t agents, std::size_t t)
      : n_(agents), dim_(2 * agents), t_(t), entries_(dim_ * dim_, 0.0) {}

  static StateMatrix identity(std::size_t dim) {
    StateMatrix m;
    m.n_ = dim / 2;
    m.dim_ = dim;
    m.entries_.assign(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  // Arbitrary square matrix, used for hand-built counterexamples.
  static StateMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    StateMatrix m;
    const std::size_t dim = rows.size();
    m.n_ = dim / 2;
    m.dim_ = dim;
    m.entries_.reserve(dim * dim);
    for (const auto& r : rows) {
      if (r.size() != dim) throw std::invalid_argument("StateMatrix::from_rows: not square");
      m.entries_.insert(m.entries_.end(), r.begin(), r.end());
    }
    return m;
  }

  [[nodiscard]] std::size_t agents() const { return n_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] std::size_t t() const { return t_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * dim() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * dim() + j]; }

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {entries_.data() + i * dim(), dim()};
  }

  // Entry (i, j) of one n x n block.
  [[nodiscard]] double block(Block b, std::size_t i, std::size_t j) const {
    const std::size_t r = (b == Block::P21 || b == Block::P22) ? n_ : 0;
    const std::size_t c = (b == Block::P12 || b == Block::P22) ? n_ : 0;
    return (*this)(r + i, c + j);
  }

  [[nodiscard]] std::vector<double> apply(std::span<const double> v) const {
    if (v.size() != dim()) throw std::invalid_argument("StateMatrix::apply: dimension mismatch");
    std::vector<double> out(dim(), 0.0);
    for (std::size_t i = 0; i < dim(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim(); ++j) acc += (*this)(i, j) * v[j];
      out[i] = acc;
    }
    return out;
  }

  [[nodiscard]] const std::vector<double>& entries() const { return entries_; }

 private:
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
  std::size_t t_ = 0;
  std::vector<double> entries_;
};

struct CoefficientBounds {
  double alpha = 0.0;  // lower bound on positive entries
  double beta = 0.0;   // lower bound on diagonal entries
};

struct RowStochasticCheck {
  bool ok = true;
  double max_deviation = 0.0;
};

struct BoundViolation {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  bool diagonal = false;  // violated beta rather than alpha
};

struct BoundsCheck {
  bool ok = true;
  std::vector<BoundViolation> violations;
};

inline AugmentedState lift(const std::vector<double>& x, const std::vector<double>& y_prev,
                           std::size_t t = 1) {
  if (x.size() != y_prev.size()) throw std::invalid_argument("lift: |x| != |y_prev|");
  if (t < 1) throw std::invalid_argument("lift: augmented state is defined for t >= 1");
  AugmentedState out{t, {}};
  out.z.reserve(2 * x.size());
  out.z.insert(out.z.end(), x.begin(), x.end());
  out.z.insert(out.z.end(), y_prev.begin(), y_prev.end());
  return out;
}

// z(1) from (x(0), y(0)) by one direct step.
inline AugmentedState bootstrap(const PopulationState& initial, const ModelParams& p) {
  const PopulationState first = step(initial, p);
  return lift(first.x, initial.y, first.t);
}

// y(t) recovered from z(t) through the action rule.
inline std::vector<double> reconstruct_actions(const AugmentedState& z, const ModelParams& p) {
  const std::size_t n = z.agents();
  if (z.z.size() != 2 * p.n) throw std::invalid_argument("reconstruct_actions: dimension mismatch");
  const auto lagged = z.lagged_actions();
  const double pull = (1.0 - p.phi) * (std::accumulate(lagged.begin(), lagged.end(), 0.0) /
                                       static_cast<double>(n));
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = p.phi * z.z[i] + pull;
  return y;
}

inline NeighborSets augmented_neighbor_sets(const AugmentedState& z, const ModelParams& p) {
  const auto x = z.opinions();
  return neighbor_sets(std::vector<double>(x.begin(), x.end()), reconstruct_actions(z, p),
                       p.epsilon, z.t);
}

inline StateMatrix assemble_state_matrix(const AugmentedState& z, const ModelParams& p) {
  p.validate();
  const std::size_t n = p.n;
  const NeighborSets nbrs = augmented_neighbor_sets(z, p);
  StateMatrix P(n, z.t);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& nb = nbrs.sets[i];
    const double k = static_cast<double>(nb.size());
    P(i, i) = 1.0 / (k + 1.0);
    for (std::size_t j : nb) P(i, j) = p.phi / (k + 1.0);
    const double coupling = (1.0 - p.phi) * k / ((k + 1.0) * dn);
    for (std::size_t j = 0; j < n; ++j) P(i, n + j) = coupling;
  }
  const double share = (1.0 - p.phi) / dn;
  for (std::size_t i = 0; i < n; ++i) {
    P(n + i, i) = p.phi;
    for (std::size_t j = 0; j < n; ++j) P(n + i, n + j) = share;
  }
  return P;
}

inline AugmentedState matrix_step(const AugmentedState& z, const ModelParams& p) {
  if (z.t < 1) throw std::invalid_argument("matrix_step: requires t >= 1");
  const StateMatrix P = assemble_state_matrix(z, p);
  return {z.t + 1, P.apply(z.z)};
}

inline RowStochasticCheck check_row_stochastic(const StateMatrix& P, double tol) {
  RowStochasticCheck out;
  for (std::size_t i = 0; i < P.dim(); ++i) {
    double sum = 0.0;
    for (double e : P.row(i)) {
      if (e < 0.0) out.ok = false;
      sum += e;
    }
    out.max_deviation = std::max(out.max_deviation, std::abs(sum - 1.0));
  }
  if (out.max_deviation > tol) out.ok = false;
  return out;
}

inline CoefficientBounds coefficient_bounds(const ModelParams& p) {
  if (!(p.phi > 0.0 && p.phi < 1.0))
    throw std::invalid_argument("coefficient_bounds: requires phi in the open interval (0,1)");
  if (p.n < 1) throw std::invalid_argument("coefficient_bounds: n must be >= 1");
  const double n = static_cast<double>(p.n);
  const double phi = p.phi;
  CoefficientBounds b;
  b.alpha = std::min({phi / n, (1.0 - phi) / (2.0 * n), phi, (1.0 - phi) / n});
  b.beta = std::min(1.0 / n, (1.0 - phi) / n);
  return b;
}

inline constexpr double kBoundSlack = 1e-15;

inline BoundsCheck verify_bounds(const StateMatrix& P, const CoefficientBounds& b) {
  BoundsCheck out;
  for (std::size_t i = 0; i < P.dim(); ++i) {
    for (std::size_t j = 0; j < P.dim(); ++j) {
      const double e = P(i, j);
      const bool bad_alpha = e > 0.0 && e < b.alpha - kBoundSlack;
      const bool bad_beta = i == j && e < b.beta - kBoundSlack;
      if (bad_alpha || bad_beta) out.violations.push_back({i, j, e, bad_beta});
    }
  }
  out.ok = out.violations.empty();
  return out;
}

}  // namespace coevo
