#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "sgmap/model.hpp"
#include "sgmap/priors.hpp"

namespace sgmap {

/// How prior masses are turned into penalties.
///  - bayes: 2 sigma^2 (1 + 1/gamma) ln(pi^{-1}(h) C(n,h) (1+gamma)^{h/2}), the
///    MAP penalty for the N(0, gamma sigma^2) slab.
///  - complexity: 2 sigma^2 ln(pi^{-1}(h) C(n,h)), the plain complexity
///    penalty with no slab terms (kept for sensitivity studies).
enum class PenaltyForm { bayes, complexity };

struct PenaltyConfig {
  double gamma = 1.0;
  double sigma = 1.0;
  SparsityPrior between_prior;
  /// One prior shared by all groups, or one per group.
  std::vector<SparsityPrior> within_priors;
  PenaltyForm form = PenaltyForm::bayes;

  const SparsityPrior& within(std::size_t group) const {
    return within_priors.size() == 1 ? within_priors.front() : within_priors.at(group);
  }

  /// Scale multiplying every log-odds term.
  double scale() const noexcept {
    const double s2 = 2.0 * sigma * sigma;
    return form == PenaltyForm::bayes ? s2 * (1.0 + 1.0 / gamma) : s2;
  }

  void validate(std::size_t m, std::size_t n) const {
    if (!(gamma > 0) || !std::isfinite(gamma)) throw parameter_error("PenaltyConfig: gamma must be positive");
    if (!(sigma > 0) || !std::isfinite(sigma)) throw parameter_error("PenaltyConfig: sigma must be positive");
    if (between_prior.support_max() != m) throw dimension_error("PenaltyConfig: between prior must live on {0..m}");
    for (std::size_t k = 0; k <= m; ++k)
      if (between_prior.log_mass(k) == neg_inf)
        throw parameter_error("PenaltyConfig: between prior needs positive mass on {0..m}");
    if (within_priors.size() != 1 && within_priors.size() != m)
      throw dimension_error("PenaltyConfig: need one shared within prior or one per group");
    for (const auto& p : within_priors) {
      if (p.support_max() != n) throw dimension_error("PenaltyConfig: within prior must live on {1..n}");
      for (std::size_t h = 1; h <= n; ++h)
        if (p.log_mass(h) == neg_inf)
          throw parameter_error("PenaltyConfig: within prior needs positive mass on {1..n}");
    }
  }
};

/// Pen_j(h); Pen_j(0) = 0.
inline double pen_within(const PenaltyConfig& cfg, std::size_t group, std::size_t h) {
  const auto& prior = cfg.within(group);
  const std::size_t n = prior.support_max();
  if (h > n) throw dimension_error("pen_within: h exceeds n");
  if (h == 0) return 0.0;
  double v = -prior.log_mass(h) + log_choose(n, h);
  if (cfg.form == PenaltyForm::bayes) v += 0.5 * double(h) * std::log1p(cfg.gamma);
  return cfg.scale() * v;
}

/// Pen_0(m0).
inline double pen_between(const PenaltyConfig& cfg, std::size_t m0) {
  const std::size_t m = cfg.between_prior.support_max();
  if (m0 > m) throw dimension_error("pen_between: m0 exceeds m");
  return cfg.scale() * (-cfg.between_prior.log_mass(m0) + log_choose(m, m0));
}

/// Order of components by decreasing |y|, ties to the lower index.
inline std::vector<std::size_t> magnitude_order(std::span<const double> y) {
  std::vector<std::size_t> idx(y.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(y[a]) > std::abs(y[b]); });
  return idx;
}

struct HSelection {
  std::size_t h_hat = 1;
  double w = 0.0;
};

/// argmin over h in {1..n} of -sum_{i<=h} y_(i)^2 + pen[h]; smallest h on ties.
/// `pen` is indexed by h and has n+1 entries.
inline HSelection select_h(std::span<const double> y, std::span<const double> pen) {
  const std::size_t n = y.size();
  if (n < 1) throw dimension_error("select_h: empty group");
  if (pen.size() != n + 1) throw dimension_error("select_h: penalty table must have n+1 entries");
  const auto order = magnitude_order(y);
  HSelection best{0, 0.0};
  double cum = 0.0;
  for (std::size_t h = 1; h <= n; ++h) {
    const double v = y[order[h - 1]];
    cum += v * v;
    const double cost = -cum + pen[h];
    if (best.h_hat == 0 || cost < best.w) best = {h, cost};
  }
  return best;
}

/// Penalty tables for a fixed configuration and shape; reused across
/// replications.
class PenaltyTables {
 public:
  PenaltyTables(const PenaltyConfig& cfg, std::size_t m, std::size_t n) : n_(n) {
    cfg.validate(m, n);
    const std::size_t tables = cfg.within_priors.size();
    within_.resize(tables);
    for (std::size_t t = 0; t < tables; ++t) {
      within_[t].resize(n + 1);
      for (std::size_t h = 0; h <= n; ++h) within_[t][h] = pen_within(cfg, t, h);
    }
    between_.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) between_[k] = pen_between(cfg, k);
  }

  std::span<const double> within(std::size_t group) const {
    return within_.size() == 1 ? within_.front() : within_.at(group);
  }
  std::span<const double> between() const noexcept { return between_; }
  std::size_t n() const noexcept { return n_; }

 private:
  std::size_t n_;
  std::vector<std::vector<double>> within_;
  std::vector<double> between_;
};

inline HSelection select_h(std::span<const double> y, const PenaltyConfig& cfg, std::size_t group) {
  std::vector<double> pen(y.size() + 1);
  for (std::size_t h = 0; h <= y.size(); ++h) pen[h] = pen_within(cfg, group, h);
  return select_h(y, pen);
}

struct GroupSelection {
  std::size_t m0_hat = 0;
  /// Groups owning the m0_hat smallest scores, in ascending index order.
  std::vector<std::size_t> selected;
};

/// argmin over m0 of sum_{j<=m0} W_(j) + pen[m0]; W ties by group index,
/// smallest m0 on ties.
inline GroupSelection select_groups(std::span<const double> w, std::span<const double> pen) {
  const std::size_t m = w.size();
  if (pen.size() != m + 1) throw dimension_error("select_groups: penalty table must have m+1 entries");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  std::size_t best_k = 0;
  double best = pen[0];
  double cum = 0.0;
  for (std::size_t k = 1; k <= m; ++k) {
    cum += w[order[k - 1]];
    if (cum + pen[k] < best) {
      best = cum + pen[k];
      best_k = k;
    }
  }
  GroupSelection out{best_k, {order.begin(), order.begin() + std::ptrdiff_t(best_k)}};
  std::sort(out.selected.begin(), out.selected.end());
  return out;
}

inline GroupSelection select_groups(std::span<const double> w, const PenaltyConfig& cfg) {
  std::vector<double> pen(w.size() + 1);
  for (std::size_t k = 0; k <= w.size(); ++k) pen[k] = pen_between(cfg, k);
  return select_groups(w, pen);
}

struct GroupScore {
  std::size_t group_index = 0;
  std::size_t h_hat = 1;
  double w = 0.0;
  /// Indices of the h_hat largest |y_ij|, largest first.
  std::vector<std::size_t> kept_component_ranks;
};

struct EstimateResult {
  MeanSet estimate;
  std::vector<std::size_t> selected_groups;
  std::size_t m0_hat = 0;
  std::vector<GroupScore> scores;
  double objective = 0.0;
};

/// Penalized least-squares criterion at a keep-or-kill pattern d:
/// residual sum of squares + sum of Pen_j(h_j) over nonzero groups + Pen_0(m0).
inline double map_objective(const ObservationSet& data, const IndicatorMatrix& d, const PenaltyConfig& cfg) {
  if (d.m() != data.m() || d.n() != data.n()) throw dimension_error("map_objective: shape mismatch");
  double total = 0.0;
  std::size_t m0 = 0;
  for (std::size_t j = 0; j < data.m(); ++j) {
    std::size_t h = 0;
    for (std::size_t i = 0; i < data.n(); ++i) {
      if (d(j, i)) ++h;
      else total += data.values()(j, i) * data.values()(j, i);
    }
    if (h > 0) {
      ++m0;
      total += pen_within(cfg, j, h);
    }
  }
  return total + pen_between(cfg, m0);
}

namespace detail {

inline EstimateResult assemble(const ObservationSet& data, std::vector<GroupScore> scores,
                               std::span<const double> between_pen) {
  const std::size_t m = data.m();
  std::vector<double> w(m);
  for (std::size_t j = 0; j < m; ++j) w[j] = scores[j].w;
  auto sel = select_groups(w, between_pen);

  RealMatrix est(m, data.n());
  double objective = 0.0;
  for (double v : data.values().flat()) objective += v * v;
  for (std::size_t j : sel.selected) {
    for (std::size_t i : scores[j].kept_component_ranks) est(j, i) = data.values()(j, i);
    // W_j = -(kept energy) + Pen_j(h_j), so adding it swaps the group's
    // full energy for its residual plus penalty.
    objective += scores[j].w;
  }
  objective += between_pen[sel.m0_hat];
  return {MeanSet(std::move(est)), std::move(sel.selected), sel.m0_hat, std::move(scores), objective};
}

}  // namespace detail

/// Sparse group MAP estimator with precomputed penalties.
class MapEstimator {
 public:
  MapEstimator(PenaltyConfig cfg, std::size_t m, std::size_t n)
      : cfg_(std::move(cfg)), tables_(cfg_, m, n), m_(m) {}

  const PenaltyConfig& config() const noexcept { return cfg_; }
  const PenaltyTables& tables() const noexcept { return tables_; }

  EstimateResult operator()(const ObservationSet& data) const {
    check(data);
    std::vector<GroupScore> scores(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      const auto y = data.group(j);
      const auto order = magnitude_order(y);
      const auto pen = tables_.within(j);
      std::size_t best_h = 0;
      double best = 0.0, cum = 0.0;
      for (std::size_t h = 1; h <= y.size(); ++h) {
        const double v = y[order[h - 1]];
        cum += v * v;
        const double cost = -cum + pen[h];
        if (best_h == 0 || cost < best) {
          best = cost;
          best_h = h;
        }
      }
      scores[j] = {j, best_h, best, {order.begin(), order.begin() + std::ptrdiff_t(best_h)}};
    }
    return detail::assemble(data, std::move(scores), tables_.between());
  }

  /// Same selection with h_hat_j = max(1, #{i : y_ij^2 > 2 sigma^2 lambda_j^2}).
  /// With binomial within-priors and lambda_j from binomial_lambda_sq this
  /// coincides with operator().
  EstimateResult hard_threshold(const ObservationSet& data, std::span<const double> lambda) const {
    check(data);
    if (lambda.size() != m_ && lambda.size() != 1)
      throw dimension_error("hard_threshold: need one lambda per group or a shared one");
    for (const auto& p : cfg_.within_priors)
      if (!p.is_binomial()) throw parameter_error("hard_threshold: within priors must be binomial");
    const double s2 = 2.0 * cfg_.sigma * cfg_.sigma;
    std::vector<GroupScore> scores(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      const double lam = lambda.size() == 1 ? lambda[0] : lambda[j];
      const double thr = s2 * lam * lam;
      const auto y = data.group(j);
      const auto order = magnitude_order(y);
      std::size_t h = 0;
      double cum = 0.0, kept = 0.0;
      for (std::size_t r = 0; r < y.size(); ++r) {
        const double v2 = y[order[r]] * y[order[r]];
        cum += v2;
        if (v2 > thr || r == 0) {
          h = r + 1;
          kept = cum;
        } else {
          break;
        }
      }
      scores[j] = {j, h, -kept + tables_.within(j)[h], {order.begin(), order.begin() + std::ptrdiff_t(h)}};
    }
    return detail::assemble(data, std::move(scores), tables_.between());
  }

 private:
  void check(const ObservationSet& data) const {
    if (data.m() != m_ || data.n() != tables_.n()) throw dimension_error("MapEstimator: data shape mismatch");
  }

  PenaltyConfig cfg_;
  PenaltyTables tables_;
  std::size_t m_;
};

/// Runs the three-step sparse group MAP algorithm on `data`.
inline EstimateResult estimate(const ObservationSet& data, const PenaltyConfig& cfg) {
  return MapEstimator(cfg, data.m(), data.n())(data);
}

/// Per-group lambda_j = sqrt(binomial_lambda_sq(xi_j, gamma, within)).
inline std::vector<double> binomial_lambdas(const PenaltyConfig& cfg, std::size_t m) {
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto* b = std::get_if<prior_kind::Binomial>(&cfg.within(j).descriptor());
    if (!b) throw parameter_error("binomial_lambdas: within priors must be binomial");
    out[j] = std::sqrt(binomial_lambda_sq(b->xi, cfg.gamma, PenaltyLevel::within));
  }
  return out;
}

inline EstimateResult hard_threshold_fast_path(const ObservationSet& data, std::span<const double> lambda,
                                               const PenaltyConfig& cfg) {
  return MapEstimator(cfg, data.m(), data.n()).hard_threshold(data, lambda);
}

inline EstimateResult hard_threshold_fast_path(const ObservationSet& data, const PenaltyConfig& cfg) {
  const auto lambda = binomial_lambdas(cfg, data.m());
  return hard_threshold_fast_path(data, lambda, cfg);
}

}  // namespace sgmap
