#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "sgmap/model.hpp"

namespace sgmap {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// log C(n, k) via log-gamma.
inline double log_choose(std::size_t n, std::size_t k) {
  if (k > n) return neg_inf;
  if (k == 0 || k == n) return 0.0;
  return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n - k) + 1);
}

/// log(sum exp(v)), ignoring -inf entries.
inline double log_sum_exp(std::span<const double> v) {
  double hi = neg_inf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == neg_inf) return neg_inf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

namespace prior_kind {
struct Binomial {
  std::size_t K;
  double xi;
  friend bool operator==(const Binomial&, const Binomial&) = default;
};
struct Geometric {
  std::size_t K;
  double q;
  bool include_zero;
  friend bool operator==(const Geometric&, const Geometric&) = default;
};
struct Uniform {
  std::size_t K;
  bool include_zero;
  friend bool operator==(const Uniform&, const Uniform&) = default;
};
/// masses[k] = pi(k); zeros allowed (support is where the mass is positive).
struct Custom {
  std::vector<double> masses;
  friend bool operator==(const Custom&, const Custom&) = default;
};
}  // namespace prior_kind

using PriorDescriptor =
    std::variant<prior_kind::Binomial, prior_kind::Geometric, prior_kind::Uniform, prior_kind::Custom>;

/// A probability mass function on {0, ..., K} held as a table of log-masses.
class SparsityPrior {
 public:
  std::size_t support_max() const noexcept { return log_mass_.size() - 1; }
  /// Smallest k with positive mass.
  std::size_t support_min() const noexcept {
    std::size_t k = 0;
    while (log_mass_[k] == neg_inf) ++k;
    return k;
  }
  double log_mass(std::size_t k) const noexcept {
    return k < log_mass_.size() ? log_mass_[k] : neg_inf;
  }
  double mass(std::size_t k) const noexcept { return std::exp(log_mass(k)); }
  std::span<const double> log_masses() const noexcept { return log_mass_; }
  const PriorDescriptor& descriptor() const noexcept { return desc_; }

  bool is_binomial() const noexcept { return std::holds_alternative<prior_kind::Binomial>(desc_); }

  static SparsityPrior from_descriptor(const PriorDescriptor& d);

  friend bool operator==(const SparsityPrior& a, const SparsityPrior& b) { return a.desc_ == b.desc_; }

 private:
  SparsityPrior(std::vector<double> log_mass, PriorDescriptor desc)
      : log_mass_(std::move(log_mass)), desc_(std::move(desc)) {}

  std::vector<double> log_mass_;
  PriorDescriptor desc_;

  friend SparsityPrior binomial_prior(std::size_t, double);
  friend SparsityPrior truncated_geometric_prior(std::size_t, double, bool);
  friend SparsityPrior uniform_prior(std::size_t, bool);
  friend SparsityPrior custom_prior(std::vector<double>);
};

/// B(K, xi).
inline SparsityPrior binomial_prior(std::size_t K, double xi) {
  if (!(xi > 0.0 && xi < 1.0)) throw parameter_error("binomial_prior: xi must lie in (0,1)");
  std::vector<double> lm(K + 1);
  const double lx = std::log(xi), l1x = std::log1p(-xi);
  for (std::size_t k = 0; k <= K; ++k)
    lm[k] = log_choose(K, k) + double(k) * lx + double(K - k) * l1x;
  // lgamma rounding drifts the total by ~1e-11 for K in the tens of thousands
  const double z = log_sum_exp(lm);
  for (double& v : lm) v -= z;
  return SparsityPrior(std::move(lm), prior_kind::Binomial{K, xi});
}

/// pi(k) proportional to q^k on {1..K}, or on {0..K} when include_zero.
inline SparsityPrior truncated_geometric_prior(std::size_t K, double q, bool include_zero) {
  if (!(q > 0.0 && q < 1.0)) throw parameter_error("truncated_geometric_prior: q must lie in (0,1)");
  if (K < 1) throw dimension_error("truncated_geometric_prior: K must be >= 1");
  const double lq = std::log(q);
  // sum_{k=lo}^{K} q^k = q^lo (1 - q^(K-lo+1)) / (1 - q)
  const std::size_t lo = include_zero ? 0 : 1;
  const double terms = double(K - lo + 1);
  const double log_norm = double(lo) * lq + std::log1p(-std::exp(terms * lq)) - std::log1p(-q);
  std::vector<double> lm(K + 1, neg_inf);
  for (std::size_t k = lo; k <= K; ++k) lm[k] = double(k) * lq - log_norm;
  return SparsityPrior(std::move(lm), prior_kind::Geometric{K, q, include_zero});
}

inline SparsityPrior uniform_prior(std::size_t K, bool include_zero = true) {
  const std::size_t lo = include_zero ? 0 : 1;
  if (K < lo) throw dimension_error("uniform_prior: empty support");
  std::vector<double> lm(K + 1, neg_inf);
  const double l = -std::log(double(K - lo + 1));
  for (std::size_t k = lo; k <= K; ++k) lm[k] = l;
  return SparsityPrior(std::move(lm), prior_kind::Uniform{K, include_zero});
}

inline SparsityPrior custom_prior(std::vector<double> masses) {
  if (masses.empty()) throw dimension_error("custom_prior: empty mass table");
  double total = 0.0;
  for (double p : masses) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw parameter_error("custom_prior: masses must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw parameter_error("custom_prior: masses must sum to 1");
  std::vector<double> lm(masses.size());
  std::transform(masses.begin(), masses.end(), lm.begin(),
                 [](double p) { return p > 0 ? std::log(p) : neg_inf; });
  return SparsityPrior(std::move(lm), prior_kind::Custom{std::move(masses)});
}

inline SparsityPrior SparsityPrior::from_descriptor(const PriorDescriptor& d) {
  return std::visit(
      [](const auto& k) -> SparsityPrior {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, prior_kind::Binomial>) return binomial_prior(k.K, k.xi);
        else if constexpr (std::is_same_v<T, prior_kind::Geometric>)
          return truncated_geometric_prior(k.K, k.q, k.include_zero);
        else if constexpr (std::is_same_v<T, prior_kind::Uniform>) return uniform_prior(k.K, k.include_zero);
        else return custom_prior(k.masses);
      },
      d);
}

/// Within-group inclusion probability that turns the binomial penalty into
/// the universal threshold sigma * sqrt(2 ln n).
inline double universal_xi(std::size_t n, double gamma) {
  if (n < 2) throw dimension_error("universal_xi: n must be >= 2");
  if (!(gamma > 0)) throw parameter_error("universal_xi: gamma must be positive");
  const double r = std::sqrt(gamma + 1.0);
  return r / (r + std::pow(double(n), gamma / (gamma + 1.0)));
}

enum class PenaltyLevel { between, within };

/// Slope lambda^2 of the linear penalty 2 sigma^2 lambda^2 k induced by a
/// binomial prior. The hard threshold it implies is sqrt(2) * sigma * lambda.
inline double binomial_lambda_sq(double xi, double gamma, PenaltyLevel level) {
  if (!(xi > 0.0 && xi < 1.0)) throw parameter_error("binomial_lambda_sq: xi must lie in (0,1)");
  if (!(gamma > 0)) throw parameter_error("binomial_lambda_sq: gamma must be positive");
  double log_arg = std::log1p(-xi) - std::log(xi);
  if (level == PenaltyLevel::within) log_arg += 0.5 * std::log1p(gamma);
  if (log_arg < 0.0) throw parameter_error("binomial_lambda_sq: xi too large for a nonnegative slope");
  return (1.0 + 1.0 / gamma) * log_arg;
}

/// c(gamma) = 8 (gamma + 3/4)^2.
inline double c_gamma(double gamma) { return 8.0 * (gamma + 0.75) * (gamma + 0.75); }

struct AssumptionPReport {
  double gamma = 0;
  double c_gamma = 0;
  std::vector<std::size_t> violations;
  bool satisfied = true;
};

/// Checks pi(h) <= C(n,h) exp(-c(gamma) h) for h = 1..n in log-space.
inline AssumptionPReport check_assumption_p(const SparsityPrior& prior, double gamma, std::size_t n) {
  if (prior.support_max() != n) throw dimension_error("check_assumption_p: prior support must be {..,n}");
  AssumptionPReport rep{gamma, c_gamma(gamma), {}, true};
  for (std::size_t h = 1; h <= n; ++h) {
    const double lhs = prior.log_mass(h);
    const double rhs = log_choose(n, h) - rep.c_gamma * double(h);
    if (lhs > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) rep.violations.push_back(h);
  }
  rep.satisfied = rep.violations.empty();
  return rep;
}

}  // namespace sgmap
