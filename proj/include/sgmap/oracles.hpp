#pragma once

// Brute-force references for the estimators. Slow by construction; meant for
// tests on tiny instances.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <algorithm>
#include <vector>

#include "sgmap/lasso.hpp"
#include "sgmap/map_estimator.hpp"

namespace sgmap {

struct OracleBudget {
  std::size_t max_cells = 20;
  double tolerance = 1e-12;

  void validate() const {
    if (max_cells > 20) throw parameter_error("OracleBudget: max_cells is capped at 20");
    if (!(tolerance > 0.0 && tolerance <= 1e-3)) throw parameter_error("OracleBudget: tolerance must lie in (0, 1e-3]");
  }
};

struct ExhaustiveResult {
  IndicatorMatrix pattern;
  double objective = 0.0;
  /// Number of patterns whose objective lies within `tie_window` of the
  /// minimum (1 means the minimizer is unique at that resolution).
  std::size_t near_optimal = 1;
};

namespace detail {

inline IndicatorMatrix pattern_from_mask(std::uint64_t mask, std::size_t m, std::size_t n) {
  IndicatorMatrix d(m, n);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < n; ++i) d.set(j, i, (mask >> (j * n + i)) & 1U);
  return d;
}

inline void check_budget(const ObservationSet& data, const OracleBudget& budget) {
  budget.validate();
  if (data.m() * data.n() > budget.max_cells) throw dimension_error("oracle: instance exceeds max_cells");
}

inline bool within(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace detail

/// Minimizes the penalized least-squares criterion over all 2^(nm)
/// indicator matrices. Ties within 1e-12 go to the smallest mask, bit
/// j*n + i standing for cell (j, i).
inline ExhaustiveResult exhaustive_map(const ObservationSet& data, const PenaltyConfig& cfg,
                                       const OracleBudget& budget = {}, double tie_window = 1e-9) {
  detail::check_budget(data, budget);
  cfg.validate(data.m(), data.n());
  const std::size_t m = data.m(), n = data.n();
  const std::uint64_t total = std::uint64_t{1} << (m * n);
  std::vector<double> objectives(total);
  std::uint64_t best = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    objectives[mask] = map_objective(data, detail::pattern_from_mask(mask, m, n), cfg);
    if (objectives[mask] < objectives[best] && !detail::within(objectives[mask], objectives[best], 1e-12)) best = mask;
  }
  std::size_t ties = 0;
  for (double v : objectives) ties += detail::within(v, objectives[best], tie_window);
  return {detail::pattern_from_mask(best, m, n), objectives[best], ties};
}

/// Unnormalized log-posterior of an indicator matrix under the hierarchical
/// prior (between count, uniform group placement, within count, uniform
/// component placement, N(0, gamma sigma^2) slab).
inline double log_posterior(const ObservationSet& data, const IndicatorMatrix& d, const PenaltyConfig& cfg) {
  const std::size_t m = data.m(), n = data.n();
  const double g = cfg.gamma, s2 = cfg.sigma * cfg.sigma;
  double lp = 0.0;
  std::size_t m0 = 0;
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t h = d.h(j);
    if (h == 0) continue;
    ++m0;
    double energy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (d(j, i)) energy += data.values()(j, i) * data.values()(j, i);
    lp += cfg.within(j).log_mass(h) - log_choose(n, h) - 0.5 * double(h) * std::log1p(g) +
          g / (g + 1.0) * energy / (2.0 * s2);
  }
  return lp + cfg.between_prior.log_mass(m0) - log_choose(m, m0);
}

/// Maximizes log_posterior over all indicator matrices (smallest mask on
/// ties within 1e-12).
inline IndicatorMatrix posterior_argmax(const ObservationSet& data, const PenaltyConfig& cfg,
                                        const OracleBudget& budget = {}) {
  detail::check_budget(data, budget);
  cfg.validate(data.m(), data.n());
  if (cfg.form != PenaltyForm::bayes) throw parameter_error("posterior_argmax: requires the bayes penalty form");
  const std::size_t m = data.m(), n = data.n();
  const std::uint64_t total = std::uint64_t{1} << (m * n);
  std::uint64_t best = 0;
  double best_lp = log_posterior(data, detail::pattern_from_mask(0, m, n), cfg);
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    const double lp = log_posterior(data, detail::pattern_from_mask(mask, m, n), cfg);
    if (lp > best_lp && !detail::within(lp, best_lp, 1e-12)) {
      best_lp = lp;
      best = mask;
    }
  }
  return detail::pattern_from_mask(best, m, n);
}

/// Sparse group lasso criterion: sum_j ||y_j - mu_j||^2 + lambda1 ||mu_j||_2 + lambda2 ||mu_j||_1.
inline double sgl_objective(const ObservationSet& data, const MeanSet& est, const LassoParams& p) {
  double total = 0.0;
  for (std::size_t j = 0; j < data.m(); ++j) {
    const auto y = data.group(j);
    const auto mu = est.group(j);
    double rss = 0, l2 = 0, l1 = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      rss += (y[i] - mu[i]) * (y[i] - mu[i]);
      l2 += mu[i] * mu[i];
      l1 += std::abs(mu[i]);
    }
    total += rss + p.lambda1 * std::sqrt(l2) + p.lambda2 * l1;
  }
  return total;
}

/// Minimizes the sparse group lasso criterion by ADMM on the splitting
/// x = z, x carrying the quadratic and l1 terms, z the group l2 term. Uses
/// only the two separate proximal maps, never their composition.
inline MeanSet numeric_sgl(const ObservationSet& data, const LassoParams& p, const OracleBudget& budget = {},
                           std::size_t max_iter = 1'000'000) {
  budget.validate();
  p.validate();
  const std::size_t m = data.m(), n = data.n();
  constexpr double rho = 2.0;
  RealMatrix out(m, n);
  std::vector<double> x(n), z(n), u(n), z_prev(n), v(n);
  for (std::size_t j = 0; j < m; ++j) {
    const auto y = data.group(j);
    std::fill(z.begin(), z.end(), 0.0);
    std::fill(u.begin(), u.end(), 0.0);
    bool converged = false;
    for (std::size_t it = 0; it < max_iter; ++it) {
      for (std::size_t i = 0; i < n; ++i) {
        const double a = 2.0 * y[i] + rho * (z[i] - u[i]);
        const double s = std::abs(a) - p.lambda2;
        x[i] = s > 0 ? std::copysign(s, a) / (2.0 + rho) : 0.0;
      }
      z_prev = z;
      double vn = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = x[i] + u[i];
        vn += v[i] * v[i];
      }
      const double f = detail::shrink_factor(std::sqrt(vn), p.lambda1 / rho);
      double primal = 0.0, dual = 0.0, scale = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        z[i] = f * v[i];
        u[i] += x[i] - z[i];
        primal = std::max(primal, std::abs(x[i] - z[i]));
        dual = std::max(dual, rho * std::abs(z[i] - z_prev[i]));
        scale = std::max(scale, std::abs(y[i]));
      }
      if (primal <= budget.tolerance * scale && dual <= budget.tolerance * scale) {
        converged = true;
        break;
      }
    }
    if (!converged) throw std::runtime_error("numeric_sgl: ADMM did not converge");
    for (std::size_t i = 0; i < n; ++i) out(j, i) = z[i];
  }
  return MeanSet(std::move(out));
}

}  // namespace sgmap
