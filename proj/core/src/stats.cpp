#include "cyllevy/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cyllevy/error.hpp"

namespace cyllevy {

double Moments::variance() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  const double m = sum_ / n;
  return std::max(0.0, (sum_sq_ - n * m * m) / (n - 1.0));
}

ScalarEstimate Moments::estimate() const {
  if (n_ == 0) return {};
  return {mean(), std::sqrt(variance() / static_cast<double>(n_))};
}

ScalarEstimate mean_estimate(std::span<const double> xs) {
  Moments m;
  for (double x : xs) m.add(x);
  return m.estimate();
}

ScalarEstimate ky_fan(const Matrix& samples) {
  Moments m;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) m.add(std::min(samples.col(j).norm(), 1.0));
  return m.estimate();
}

EcfEstimate empirical_cf(const Matrix& samples, const Vector& u) {
  if (u.size() != samples.rows()) throw DimensionError("empirical_cf: dimension mismatch");
  Moments c;
  Moments s;
  for (Eigen::Index j = 0; j < samples.cols(); ++j) {
    const double x = u.dot(samples.col(j));
    c.add(std::cos(x));
    s.add(std::sin(x));
  }
  const double n = std::max<double>(1.0, static_cast<double>(samples.cols()));
  return {{c.mean(), s.mean()}, std::sqrt((c.variance() + s.variance()) / n)};
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_critical(std::size_t n, std::size_t m, double level) {
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

namespace {

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson: need two equal samples of size >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  return pearson(rx, ry);
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw DomainError("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace cyllevy
