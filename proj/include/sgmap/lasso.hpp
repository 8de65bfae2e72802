#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgmap/model.hpp"
#include "sgmap/parallel.hpp"

namespace sgmap {

/// Weights of the group (l2) and component (l1) penalties.
struct LassoParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const {
    if (!(lambda1 >= 0) || !(lambda2 >= 0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
      throw parameter_error("LassoParams: lambdas must be finite and >= 0");
  }
  friend bool operator==(const LassoParams&, const LassoParams&) = default;
};

/// sign(y) (|y| - t)_+ elementwise.
inline std::vector<double> soft_threshold(std::span<const double> y, double t) {
  if (!(t >= 0)) throw parameter_error("soft_threshold: t must be >= 0");
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double a = std::abs(y[i]) - t;
    out[i] = a > 0 ? std::copysign(a, y[i]) : 0.0;
  }
  return out;
}

namespace detail {

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

/// Shrink factor (1 - t / ||v||)_+, zero for a zero vector.
inline double shrink_factor(double norm, double t) {
  if (norm <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - t / norm);
}

}  // namespace detail

/// Closed-form group lasso: each group scaled by (1 - (lambda/2)/||y_j||)_+.
inline MeanSet group_lasso(const ObservationSet& data, double lambda) {
  if (!(lambda >= 0)) throw parameter_error("group_lasso: lambda must be >= 0");
  RealMatrix out = data.values();
  for (std::size_t j = 0; j < data.m(); ++j) {
    auto row = out.row(j);
    const double f = detail::shrink_factor(detail::norm2(row), lambda / 2.0);
    for (double& v : row) v *= f;
  }
  return MeanSet(std::move(out));
}

/// Closed-form sparse group lasso: soft-threshold at lambda2/2, then shrink
/// the group at lambda1/2.
inline MeanSet sparse_group_lasso(const ObservationSet& data, const LassoParams& p) {
  p.validate();
  RealMatrix out(data.m(), data.n());
  for (std::size_t j = 0; j < data.m(); ++j) {
    auto t = soft_threshold(data.group(j), p.lambda2 / 2.0);
    const double f = detail::shrink_factor(detail::norm2(t), p.lambda1 / 2.0);
    auto row = out.row(j);
    for (std::size_t i = 0; i < t.size(); ++i) row[i] = f * t[i];
  }
  return MeanSet(std::move(out));
}

/// lambda2 giving universal soft thresholding, 2 sigma sqrt(2 ln n).
inline double universal_lambda2(double sigma, std::size_t n) {
  return 2.0 * sigma * std::sqrt(2.0 * std::log(double(n)));
}

/// Inclusive arithmetic range start, start+step, ..., <= stop.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  double step = 1.0;

  std::vector<double> values() const {
    if (!(step > 0) || stop < start) throw parameter_error("Range: need step > 0 and stop >= start");
    std::vector<double> v;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    v.reserve(count);
    for (std::size_t k = 0; k < count; ++k) v.push_back(std::round((start + double(k) * step) * 1e10) / 1e10);
    return v;
  }
};

struct GridSpec {
  std::vector<double> lambda1;
  /// Ignored in semi-oracle mode.
  std::vector<double> lambda2;

  static GridSpec defaults() { return {Range{0, 20, 0.1}.values(), Range{0, 8, 0.1}.values()}; }

  /// Parses "l1=a:b:s;l2=a:b:s" (either part optional; a single value "l1=3"
  /// is a one-point range).
  static GridSpec parse(std::string_view text) {
    GridSpec g = defaults();
    auto parse_range = [](std::string_view s) {
      std::vector<double> parts;
      std::size_t pos = 0;
      while (pos <= s.size()) {
        const auto colon = s.find(':', pos);
        const auto piece = s.substr(pos, colon == std::string_view::npos ? s.npos : colon - pos);
        parts.push_back(std::stod(std::string(piece)));
        if (colon == std::string_view::npos) break;
        pos = colon + 1;
      }
      if (parts.size() == 1) return std::vector<double>{parts[0]};
      if (parts.size() != 3) throw parameter_error("GridSpec: range must be start:stop:step");
      return Range{parts[0], parts[1], parts[2]}.values();
    };
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto semi = text.find_first_of(";,", pos);
      auto item = text.substr(pos, semi == std::string_view::npos ? text.npos : semi - pos);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) throw parameter_error("GridSpec: expected key=range");
      const auto key = item.substr(0, eq);
      if (key == "l1") g.lambda1 = parse_range(item.substr(eq + 1));
      else if (key == "l2") g.lambda2 = parse_range(item.substr(eq + 1));
      else throw parameter_error("GridSpec: unknown key " + std::string(key));
      if (semi == std::string_view::npos) break;
      pos = semi + 1;
    }
    return g;
  }
};

enum class TuneMode { semi, full };

struct GridPoint {
  LassoParams params;
  double mse = 0.0;
  double se = 0.0;
};

struct TuneResult {
  LassoParams best_params;
  double best_mse = 0.0;
  double best_se = 0.0;
  std::vector<GridPoint> grid;
  TuneMode mode = TuneMode::full;
};

/// Oracle grid search for (lambda1, lambda2): MSE at each grid point is the
/// average SSE of sparse_group_lasso over the same `reps` replications.
///
/// For fixed lambda2 the soft-thresholded group t_j is fixed and the SSE of
/// f t_j against mu_j is f^2 ||t_j||^2 - 2 f <t_j, mu_j> + ||mu_j||^2, so the
/// lambda1 sweep only needs three scalars per group.
inline TuneResult oracle_tune(const SimScenario& scenario, TuneMode mode, const GridSpec& grid,
                              std::size_t reps, std::size_t threads = 0) {
  scenario.validate();
  if (grid.lambda1.empty() || (mode == TuneMode::full && grid.lambda2.empty()))
    throw parameter_error("oracle_tune: empty grid");
  if (reps < 1) throw parameter_error("oracle_tune: reps must be >= 1");
  const std::vector<double> l2s =
      mode == TuneMode::semi ? std::vector<double>{universal_lambda2(scenario.sigma, scenario.n)} : grid.lambda2;
  const std::size_t m = scenario.m;

  std::vector<MeanSet> truth(reps);
  std::vector<RealMatrix> obs(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    auto [mu, y] = generate(scenario, r);
    truth[r] = std::move(mu);
    obs[r] = y.values();
  });

  const std::size_t n1 = grid.lambda1.size();
  std::vector<GridPoint> points(l2s.size() * n1);
  parallel_for(l2s.size(), threads, [&](std::size_t b) {
    const double half2 = l2s[b] / 2.0;
    // per (rep, group): ||t||, <t, mu>, ||mu||^2
    std::vector<double> tn(reps * m), ip(reps * m), mu2(reps * m);
    for (std::size_t r = 0; r < reps; ++r) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto y = obs[r].row(j);
        const auto mu = truth[r].group(j);
        double a = 0, c = 0, d = 0;
        for (std::size_t i = 0; i < y.size(); ++i) {
          const double s = std::abs(y[i]) - half2;
          const double t = s > 0 ? std::copysign(s, y[i]) : 0.0;
          a += t * t;
          c += t * mu[i];
          d += mu[i] * mu[i];
        }
        tn[r * m + j] = std::sqrt(a);
        ip[r * m + j] = c;
        mu2[r * m + j] = d;
      }
    }
    std::vector<double> sse(reps);
    for (std::size_t a = 0; a < n1; ++a) {
      const double half1 = grid.lambda1[a] / 2.0;
      for (std::size_t r = 0; r < reps; ++r) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t k = r * m + j;
          const double f = detail::shrink_factor(tn[k], half1);
          s += f * f * tn[k] * tn[k] - 2.0 * f * ip[k] + mu2[k];
        }
        sse[r] = s;
      }
      const auto stat = mean_and_se(sse);
      points[b * n1 + a] = {{grid.lambda1[a], l2s[b]}, stat.mean, stat.se};
    }
  });

  TuneResult out;
  out.mode = mode;
  const GridPoint* best = nullptr;
  for (const auto& p : points) {
    if (!best || p.mse < best->mse ||
        (p.mse == best->mse && (p.params.lambda1 < best->params.lambda1 ||
                                (p.params.lambda1 == best->params.lambda1 &&
                                 p.params.lambda2 < best->params.lambda2))))
      best = &p;
  }
  out.best_params = best->params;
  out.best_mse = best->mse;
  out.best_se = best->se;
  out.grid = std::move(points);
  return out;
}

}  // namespace sgmap
