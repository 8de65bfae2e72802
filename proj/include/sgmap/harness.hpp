#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <type_traits>
#include <utility>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sgmap/lasso.hpp"
#include "sgmap/map_estimator.hpp"
#include "sgmap/model.hpp"
#include "sgmap/parallel.hpp"
#include "sgmap/priors.hpp"

namespace sgmap {

namespace estimator {
/// Binomial priors: xi_j = universal_xi(n, gamma), xi_0 (defaults to 1/m).
struct MapBinomial {
  std::optional<double> xi0;
  PenaltyForm form = PenaltyForm::bayes;
};
/// Truncated geometric priors; pi_0 includes zero, pi_j lives on {1..n}.
struct MapGeometric {
  double q0 = 0.3;
  double qj = 0.3;
  PenaltyForm form = PenaltyForm::bayes;
};
struct SglSemiOracle {};
struct SglFullOracle {};
struct SglFixed {
  LassoParams params;
};
struct GroupLasso {
  double lambda = 0.0;
};
struct Zero {};
}  // namespace estimator

using EstimatorSpec =
    std::variant<estimator::MapBinomial, estimator::MapGeometric, estimator::SglSemiOracle, estimator::SglFullOracle,
                 estimator::SglFixed, estimator::GroupLasso, estimator::Zero>;

inline PenaltyConfig binomial_config(std::size_t m, std::size_t n, double gamma, double sigma,
                                     std::optional<double> xi0 = {}, PenaltyForm form = PenaltyForm::bayes) {
  return {gamma, sigma, binomial_prior(m, xi0.value_or(1.0 / double(m))), {binomial_prior(n, universal_xi(n, gamma))},
          form};
}

inline PenaltyConfig geometric_config(std::size_t m, std::size_t n, double gamma, double sigma, double q0 = 0.3,
                                      double qj = 0.3, PenaltyForm form = PenaltyForm::bayes) {
  return {gamma, sigma, truncated_geometric_prior(m, q0, true), {truncated_geometric_prior(n, qj, false)}, form};
}

struct MSEReport {
  std::string estimator;
  double gamma = 0.0;
  double mse = 0.0;
  double standard_error = 0.0;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  /// Tuned or fixed (lambda1, lambda2) for lasso-type estimators.
  std::optional<LassoParams> params;

  friend bool operator==(const MSEReport&, const MSEReport&) = default;
};

struct RunOptions {
  std::size_t threads = 0;
  GridSpec grid = GridSpec::defaults();
};

namespace detail {

inline std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Short stable label used in reports ("map-binomial", "sgl:1.5:0.9", ...).
inline std::string estimator_label(const EstimatorSpec& spec) {
  using namespace estimator;
  return std::visit(
      [](const auto& e) -> std::string {
        using T = std::decay_t<decltype(e)>;
        const auto form_suffix = [](PenaltyForm f) { return f == PenaltyForm::complexity ? "-complexity" : ""; };
        if constexpr (std::is_same_v<T, MapBinomial>) return std::string("map-binomial") + form_suffix(e.form);
        else if constexpr (std::is_same_v<T, MapGeometric>) return std::string("map-geometric") + form_suffix(e.form);
        else if constexpr (std::is_same_v<T, SglSemiOracle>) return "sgl-semi";
        else if constexpr (std::is_same_v<T, SglFullOracle>) return "sgl-full";
        else if constexpr (std::is_same_v<T, SglFixed>)
          return "sgl:" + detail::fmt_num(e.params.lambda1) + ":" + detail::fmt_num(e.params.lambda2);
        else if constexpr (std::is_same_v<T, GroupLasso>) return "group-lasso:" + detail::fmt_num(e.lambda);
        else return "zero";
      },
      spec);
}

/// Inverse of estimator_label.
inline EstimatorSpec parse_estimator(const std::string& label) {
  using namespace estimator;
  if (label == "map-binomial") return MapBinomial{};
  if (label == "map-binomial-complexity") return MapBinomial{{}, PenaltyForm::complexity};
  if (label == "map-geometric") return MapGeometric{};
  if (label == "map-geometric-complexity") return MapGeometric{0.3, 0.3, PenaltyForm::complexity};
  if (label == "sgl-semi") return SglSemiOracle{};
  if (label == "sgl-full") return SglFullOracle{};
  if (label == "zero") return Zero{};
  if (label.rfind("sgl:", 0) == 0) {
    const auto rest = label.substr(4);
    const auto colon = rest.find(':');
    if (colon == std::string::npos) throw parameter_error("parse_estimator: expected sgl:<l1>:<l2>");
    return SglFixed{{std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1))}};
  }
  if (label.rfind("group-lasso:", 0) == 0) return GroupLasso{std::stod(label.substr(12))};
  throw parameter_error("parse_estimator: unknown estimator '" + label + "'");
}

/// Per-replication SSE of `fn(observations)` against the generated truth.
template <class Fn>
std::vector<double> replicate_sse(const SimScenario& sc, std::size_t threads, Fn&& fn) {
  std::vector<double> sse(sc.replications);
  parallel_for(sc.replications, threads, [&](std::size_t r) {
    auto [mu, y] = generate(sc, r);
    sse[r] = sum_squared_error(fn(y), mu);
  });
  return sse;
}

/// Monte Carlo MSE of one estimator over scenario.replications replications.
/// Oracle-tuned lasso estimators are tuned on the same replications they
/// are scored on.
inline MSEReport run_mse(const SimScenario& sc, const EstimatorSpec& spec, double gamma, const RunOptions& opt = {}) {
  using namespace estimator;
  sc.validate();
  MSEReport rep{estimator_label(spec), gamma, 0.0, 0.0, sc.replications, sc.seed, std::nullopt};

  std::vector<double> sse;
  auto run_sgl = [&](const LassoParams& p) {
    rep.params = p;
    return replicate_sse(sc, opt.threads, [&](const ObservationSet& y) { return sparse_group_lasso(y, p); });
  };

  if (const auto* b = std::get_if<MapBinomial>(&spec)) {
    if (!(gamma > 0)) throw parameter_error("run_mse: MAP estimators need gamma > 0");
    const MapEstimator est(binomial_config(sc.m, sc.n, gamma, sc.sigma, b->xi0, b->form), sc.m, sc.n);
    sse = replicate_sse(sc, opt.threads, [&](const ObservationSet& y) { return est(y).estimate; });
  } else if (const auto* g = std::get_if<MapGeometric>(&spec)) {
    if (!(gamma > 0)) throw parameter_error("run_mse: MAP estimators need gamma > 0");
    const MapEstimator est(geometric_config(sc.m, sc.n, gamma, sc.sigma, g->q0, g->qj, g->form), sc.m, sc.n);
    sse = replicate_sse(sc, opt.threads, [&](const ObservationSet& y) { return est(y).estimate; });
  } else if (std::holds_alternative<SglSemiOracle>(spec)) {
    sse = run_sgl(oracle_tune(sc, TuneMode::semi, opt.grid, sc.replications, opt.threads).best_params);
  } else if (std::holds_alternative<SglFullOracle>(spec)) {
    sse = run_sgl(oracle_tune(sc, TuneMode::full, opt.grid, sc.replications, opt.threads).best_params);
  } else if (const auto* f = std::get_if<SglFixed>(&spec)) {
    sse = run_sgl(f->params);
  } else if (const auto* gl = std::get_if<GroupLasso>(&spec)) {
    rep.params = LassoParams{gl->lambda, 0.0};
    sse = replicate_sse(sc, opt.threads, [&](const ObservationSet& y) { return group_lasso(y, gl->lambda); });
  } else {
    sse = replicate_sse(sc, opt.threads, [&](const ObservationSet& y) { return MeanSet::zeros(y.m(), y.n()); });
  }
  const auto stat = mean_and_se(sse);
  rep.mse = stat.mean;
  rep.standard_error = stat.se;
  return rep;
}

inline const std::vector<double>& table_gammas() {
  static const std::vector<double> g{1.0, 9.0, 25.0};
  return g;
}

inline std::vector<EstimatorSpec> table3_estimators() {
  using namespace estimator;
  return {MapBinomial{}, MapGeometric{}, SglSemiOracle{}, SglFullOracle{}};
}

/// Four estimators x gamma in {1, 9, 25} on the ten-group design with
/// sigma = 1, tau = sqrt(gamma) and gamma = tau^2 / sigma^2 in the MAP
/// penalties.
inline std::vector<MSEReport> reproduce_table3(std::size_t reps, std::uint64_t seed, const RunOptions& opt = {},
                                               std::vector<EstimatorSpec> estimators = table3_estimators()) {
  if (reps < 1) throw parameter_error("reproduce_table3: reps must be >= 1");
  std::vector<MSEReport> out;
  for (double g : table_gammas()) {
    const auto sc = SimScenario::standard(std::sqrt(g), reps, seed);
    for (const auto& e : estimators) out.push_back(run_mse(sc, e, g, opt));
  }
  return out;
}

struct Table2Row {
  double gamma = 0.0;
  LassoParams params;
  double mse = 0.0;
  double se = 0.0;
};

/// Fully-oracle (lambda1, lambda2) per gamma in {1, 9, 25}.
inline std::vector<Table2Row> reproduce_table2(const GridSpec& grid, std::size_t reps, std::uint64_t seed,
                                               std::size_t threads = 0) {
  std::vector<Table2Row> out;
  for (double g : table_gammas()) {
    const auto sc = SimScenario::standard(std::sqrt(g), reps, seed);
    const auto t = oracle_tune(sc, TuneMode::full, grid, reps, threads);
    out.push_back({g, t.best_params, t.best_mse, t.best_se});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimax rates

enum class Ball { l0, strong_lp, weak_mp };
enum class Regime { dense, sparse, super_sparse };

struct RateSpec {
  Ball ball = Ball::l0;
  double p = 0.0;
  double eta = 0.0;
  std::size_t n = 0;
  double sigma = 1.0;
  Regime regime = Regime::sparse;
};

/// Radii at or above this are treated as non-vanishing (dense).
inline constexpr double dense_radius = 0.36787944117144233;  // 1/e

/// eta_0n = n^{-1/min(p,2)} sqrt(ln n), the sparse / super-sparse boundary.
inline double super_sparse_boundary(double p, std::size_t n) {
  return std::pow(double(n), -1.0 / std::min(p, 2.0)) * std::sqrt(std::log(double(n)));
}

/// Finite-n regime of a radius: dense for eta >= 1/e; for p > 0 super-sparse
/// below eta_0n; otherwise sparse. For p = 0 requires eta >= 1/n.
inline Regime classify_regime(Ball ball, double p, double eta, std::size_t n) {
  if (n < 2) throw dimension_error("classify_regime: n must be >= 2");
  if (!(eta > 0)) throw parameter_error("classify_regime: eta must be positive");
  const bool p_zero = ball == Ball::l0 || p == 0.0;
  if (p_zero) {
    if (eta > 1.0) throw parameter_error("classify_regime: l0 radius is a proportion in (0,1]");
    if (eta * double(n) < 1.0 - 1e-12) throw parameter_error("classify_regime: l0 radius below 1/n");
    return eta >= dense_radius ? Regime::dense : Regime::sparse;
  }
  if (eta >= dense_radius) return Regime::dense;
  if (eta < super_sparse_boundary(p, n)) return Regime::super_sparse;
  return Regime::sparse;
}

inline RateSpec make_rate_spec(Ball ball, double p, double eta, std::size_t n, double sigma = 1.0) {
  if (ball == Ball::l0) p = 0.0;
  return {ball, p, eta, n, sigma, classify_regime(ball, p, eta, n)};
}

/// Single-vector minimax rate R(Theta[eta]) up to constants.
inline double rate_lookup(const RateSpec& s) {
  const bool p_zero = s.ball == Ball::l0 || s.p == 0.0;
  if (p_zero && s.regime == Regime::super_sparse) throw parameter_error("rate_lookup: no super-sparse regime for p = 0");
  if (classify_regime(s.ball, s.p, s.eta, s.n) != s.regime) throw parameter_error("rate_lookup: inconsistent regime");
  const double s2n = s.sigma * s.sigma * double(s.n);
  const double eta = s.eta, p = s.p;
  switch (s.regime) {
    case Regime::dense:
      return s2n;
    case Regime::sparse: {
      if (p_zero) return s2n * eta * std::log(1.0 / eta);
      double r = p < 2.0 ? s2n * std::pow(eta, p) * std::pow(std::log(std::pow(eta, -p)), 1.0 - p / 2.0)
                         : s2n * eta * eta;
      if (s.ball == Ball::weak_mp && p == 2.0) r *= std::log(std::pow(eta, -p));
      return r;
    }
    case Regime::super_sparse:
      if (p < 2.0) return s.sigma * s.sigma * std::pow(double(s.n), 2.0 / p) * eta * eta;
      return s2n * eta * eta;
  }
  return 0.0;
}

struct SweepConfig {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t m0 = 0;
  double eta = 0.0;
};

struct SweepRow {
  SweepConfig config;
  std::size_t nonzeros_per_group = 0;
  double risk = 0.0;
  double se = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
};

/// l0-ball design: the first m0 groups carry k = max(1, round(eta n))
/// entries of value +-amplitude*sigma at uniformly chosen positions.
inline std::pair<MeanSet, ObservationSet> generate_l0(const SweepConfig& c, double amplitude, double sigma,
                                                      std::uint64_t seed, std::size_t replication) {
  if (c.m0 > c.m || c.m < 1 || c.n < 1) throw dimension_error("generate_l0: bad shape");
  const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.eta * double(c.n))));
  if (k > c.n) throw dimension_error("generate_l0: eta too large");
  auto rng = make_stream(seed, replication, Stream::signal);
  RealMatrix mu(c.m, c.n);
  std::vector<std::size_t> idx(c.n);
  for (std::size_t j = 0; j < c.m0; ++j) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
      std::swap(idx[t], idx[t + rng.below(c.n - t)]);
      mu(j, idx[t]) = (rng() >> 63) ? amplitude * sigma : -amplitude * sigma;
    }
  }
  auto noise_rng = make_stream(seed, replication, Stream::noise);
  std::normal_distribution<double> noise(0.0, sigma);
  RealMatrix y = mu;
  for (double& v : y.flat()) v += noise(noise_rng);
  return {MeanSet(std::move(mu)), ObservationSet(std::move(y), sigma)};
}

/// max(m0 R(l0[eta]), sigma^2 m0 ln(m/m0)) with eta = k/n.
inline double l0_group_bound(const SweepConfig& c, std::size_t k, double sigma) {
  const double eta = double(k) / double(c.n);
  const double r = rate_lookup(make_rate_spec(Ball::l0, 0.0, eta, c.n, sigma));
  const double between = sigma * sigma * double(c.m0) * std::log(double(c.m) / double(c.m0));
  return std::max(double(c.m0) * r, between);
}

/// Empirical risk of a MAP estimator on l0 designs against the rate bound.
/// `make_config(m, n)` supplies the penalty configuration per shape.
template <class MakeConfig>
std::vector<SweepRow> rate_sweep(const std::vector<SweepConfig>& grid, MakeConfig&& make_config, std::size_t reps,
                                 std::uint64_t seed, double amplitude = 5.0, double sigma = 1.0,
                                 std::size_t threads = 0) {
  std::vector<SweepRow> rows;
  for (const auto& c : grid) {
    const MapEstimator est(make_config(c.m, c.n), c.m, c.n);
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.eta * double(c.n))));
    std::vector<double> sse(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
      auto [mu, y] = generate_l0(c, amplitude, sigma, seed, r);
      sse[r] = sum_squared_error(est(y).estimate, mu);
    });
    const auto stat = mean_and_se(sse);
    const double bound = l0_group_bound(c, k, sigma);
    rows.push_back({c, k, stat.mean, stat.se, bound, stat.mean / bound});
  }
  return rows;
}

/// n in {64,128,256,512} x m in {16,64} x m0 in {1, m/8, m/2}, eta = n^{-1/2}.
inline std::vector<SweepConfig> default_sweep_grid() {
  std::vector<SweepConfig> g;
  for (std::size_t n : {64, 128, 256, 512})
    for (std::size_t m : {16, 64})
      for (std::size_t m0 : {std::size_t{1}, m / 8, m / 2}) g.push_back({m, n, m0, 1.0 / std::sqrt(double(n))});
  return g;
}

}  // namespace sgmap
