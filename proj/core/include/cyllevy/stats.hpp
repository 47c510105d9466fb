#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cyllevy/linalg.hpp"

namespace cyllevy {

struct ScalarEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct VectorEstimate {
  Vector value;
  Vector std_error;  // per coordinate

  /// Standard error of the Euclidean norm error, sqrt(sum stderr_k^2).
  [[nodiscard]] double norm_stderr() const { return std_error.norm(); }
};

/// Sum and sum of squares accumulator with a deterministic merge.
class Moments {
 public:
  void add(double x) {
    ++n_;
    sum_ += x;
    sum_sq_ += x * x;
  }
  void merge(const Moments& o) {
    n_ += o.n_;
    sum_ += o.sum_;
    sum_sq_ += o.sum_sq_;
  }
  [[nodiscard]] std::size_t count() const { return n_; }
  [[nodiscard]] double mean() const { return n_ == 0 ? 0.0 : sum_ / static_cast<double>(n_); }
  /// Unbiased sample variance.
  [[nodiscard]] double variance() const;
  [[nodiscard]] ScalarEstimate estimate() const;

 private:
  std::size_t n_ = 0;
  double sum_ = 0.0;
  double sum_sq_ = 0.0;
};

ScalarEstimate mean_estimate(std::span<const double> xs);

/// E[min(|X|, 1)] over the columns of `samples`.
ScalarEstimate ky_fan(const Matrix& samples);

/// Empirical characteristic function (1/n) sum exp(i <u, X_j>) with the
/// standard error of its modulus error, sqrt((Var cos + Var sin) / n).
struct EcfEstimate {
  std::complex<double> value;
  double std_error = 0.0;
};
EcfEstimate empirical_cf(const Matrix& samples, const Vector& u);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic critical value of the two-sample KS statistic at the given
/// level (0.01 or 0.05).
double ks_critical(std::size_t n, std::size_t m, double level = 0.01);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

/// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> xs, double q);

/// Pearson correlation.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace cyllevy
