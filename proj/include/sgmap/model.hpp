#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sgmap/rng.hpp"

namespace sgmap {

/// Raised when shapes disagree or a count is out of range.
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a scalar parameter lies outside its admissible domain.
struct parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix. Row j holds group j, column i component i.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }

  bool same_shape(const Matrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;

namespace detail {

inline void require_finite(const RealMatrix& v, const char* what) {
  for (double x : v.flat())
    if (!std::isfinite(x)) throw parameter_error(std::string(what) + ": non-finite entry");
}

}  // namespace detail

/// Means mu_ij, m groups by n components.
class MeanSet {
 public:
  MeanSet() = default;
  explicit MeanSet(RealMatrix values) : values_(std::move(values)) {
    detail::require_finite(values_, "MeanSet");
  }
  static MeanSet zeros(std::size_t m, std::size_t n) { return MeanSet(RealMatrix(m, n)); }

  std::size_t m() const noexcept { return values_.rows(); }
  std::size_t n() const noexcept { return values_.cols(); }
  const RealMatrix& values() const noexcept { return values_; }
  std::span<const double> group(std::size_t j) const noexcept { return values_.row(j); }

  friend bool operator==(const MeanSet&, const MeanSet&) = default;

 private:
  RealMatrix values_;
};

/// Observations y_ij = mu_ij + sigma * z_ij.
class ObservationSet {
 public:
  ObservationSet(RealMatrix values, double sigma)
      : values_(std::move(values)), sigma_(sigma) {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw dimension_error("ObservationSet: need m >= 1 and n >= 1");
    if (!(sigma_ > 0) || !std::isfinite(sigma_))
      throw parameter_error("ObservationSet: sigma must be positive");
    detail::require_finite(values_, "ObservationSet");
  }

  std::size_t m() const noexcept { return values_.rows(); }
  std::size_t n() const noexcept { return values_.cols(); }
  double sigma() const noexcept { return sigma_; }
  const RealMatrix& values() const noexcept { return values_; }
  std::span<const double> group(std::size_t j) const noexcept { return values_.row(j); }

  friend bool operator==(const ObservationSet&, const ObservationSet&) = default;

 private:
  RealMatrix values_;
  double sigma_;
};

/// Binary inclusion pattern d_ij with per-group counts h_j.
class IndicatorMatrix {
 public:
  IndicatorMatrix(std::size_t m, std::size_t n) : flags_(m, n, 0) {}

  std::size_t m() const noexcept { return flags_.rows(); }
  std::size_t n() const noexcept { return flags_.cols(); }

  bool operator()(std::size_t j, std::size_t i) const noexcept { return flags_(j, i) != 0; }
  void set(std::size_t j, std::size_t i, bool on) noexcept { flags_(j, i) = on ? 1 : 0; }

  std::size_t h(std::size_t j) const noexcept {
    std::size_t c = 0;
    for (auto f : flags_.row(j)) c += f;
    return c;
  }
  std::size_t m0() const noexcept {
    std::size_t c = 0;
    for (std::size_t j = 0; j < m(); ++j) c += h(j) > 0;
    return c;
  }

  /// Support of a keep-or-kill estimate: d_ij = 1 where the estimate is nonzero.
  static IndicatorMatrix support_of(const MeanSet& est) {
    IndicatorMatrix d(est.m(), est.n());
    for (std::size_t j = 0; j < est.m(); ++j)
      for (std::size_t i = 0; i < est.n(); ++i) d.set(j, i, est.values()(j, i) != 0.0);
    return d;
  }

  friend bool operator==(const IndicatorMatrix&, const IndicatorMatrix&) = default;

 private:
  Matrix<unsigned char> flags_;
};

/// Recipe for synthetic data: group j gets nonzero_counts[j] N(0, tau^2)
/// entries at uniformly chosen positions, plus N(0, sigma^2) noise everywhere.
struct SimScenario {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<std::size_t> nonzero_counts;
  double tau = 1.0;
  double sigma = 1.0;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  /// Draw the signal once (from replication 0's stream) and reuse it.
  bool fixed_signal = false;

  void validate() const {
    if (m < 1 || n < 1) throw dimension_error("SimScenario: need m >= 1 and n >= 1");
    if (nonzero_counts.size() != m)
      throw dimension_error("SimScenario: nonzero_counts must have m entries");
    for (auto k : nonzero_counts)
      if (k > n) throw dimension_error("SimScenario: nonzero count exceeds n");
    if (!(tau > 0) || !(sigma > 0)) throw parameter_error("SimScenario: tau and sigma must be positive");
    if (replications < 1) throw parameter_error("SimScenario: replications must be >= 1");
  }

  /// Ten groups of length 100 with five null groups and five signal groups.
  static SimScenario standard(double tau, std::size_t reps = 1000, std::uint64_t seed = 20130101) {
    return {10, 100, {0, 0, 0, 0, 0, 100, 70, 50, 20, 5}, tau, 1.0, reps, seed, false};
  }
};

/// Draws the true means for one replication.
inline MeanSet generate_means(const SimScenario& sc, std::size_t replication) {
  sc.validate();
  auto rng = make_stream(sc.seed, sc.fixed_signal ? 0 : replication, Stream::signal);
  std::normal_distribution<double> draw(0.0, sc.tau);
  RealMatrix mu(sc.m, sc.n);
  std::vector<std::size_t> idx(sc.n);
  for (std::size_t j = 0; j < sc.m; ++j) {
    const std::size_t k = sc.nonzero_counts[j];
    if (k == 0) continue;
    // partial Fisher-Yates: the first k slots are a uniform k-subset
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t t = 0; t < k; ++t) {
      std::size_t pick = t + static_cast<std::size_t>(rng.below(sc.n - t));
      std::swap(idx[t], idx[pick]);
    }
    for (std::size_t t = 0; t < k; ++t) mu(j, idx[t]) = draw(rng);
  }
  return MeanSet(std::move(mu));
}

/// Means and observations for one replication; a pure function of
/// (scenario, replication).
inline std::pair<MeanSet, ObservationSet> generate(const SimScenario& sc, std::size_t replication) {
  MeanSet mu = generate_means(sc, replication);
  auto rng = make_stream(sc.seed, replication, Stream::noise);
  std::normal_distribution<double> noise(0.0, sc.sigma);
  RealMatrix y = mu.values();
  for (double& v : y.flat()) v += noise(rng);
  return {std::move(mu), ObservationSet(std::move(y), sc.sigma)};
}

/// Sum over groups of ||estimate_j - truth_j||^2.
inline double sum_squared_error(const MeanSet& estimate, const MeanSet& truth) {
  if (!estimate.values().same_shape(truth.values()))
    throw dimension_error("sum_squared_error: shape mismatch");
  double total = 0.0;
  auto a = estimate.values().flat();
  auto b = truth.values().flat();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    total += d * d;
  }
  return total;
}

}  // namespace sgmap
