#include "cyllevy/stable.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

#include "cyllevy/error.hpp"

namespace cyllevy::stable {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable: alpha must lie in (0, 2)");
}

// Integral of f over (0, inf); f may have an integrable singularity at 0.
template <class F>
double half_line(F f) {
  boost::math::quadrature::tanh_sinh<double> head;
  boost::math::quadrature::exp_sinh<double> tail;
  return head.integrate(f, 0.0, 1.0) + tail.integrate(f, 1.0, std::numeric_limits<double>::infinity());
}

}  // namespace

double symbol_constant(double alpha) {
  check_alpha(alpha);
  if (std::abs(alpha - 1.0) < 1e-12) return std::numbers::pi;
  return 2.0 * std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0) / alpha;
}

double energy_constant(double alpha) {
  return 4.0 / (symbol_constant(alpha) * alpha * (2.0 - alpha));
}

double tail_constant(double alpha) { return 2.0 / (symbol_constant(alpha) * alpha); }

double small_jump_constant(double alpha) {
  return 2.0 / (symbol_constant(alpha) * (2.0 - alpha));
}

double gaussian_abs_moment(double alpha) {
  return std::pow(2.0, alpha / 2.0) * std::tgamma((alpha + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

double gaussian_quadratic_power(const Vector& mu, double alpha) {
  check_alpha(alpha);
  if (mu.size() == 0 || mu.maxCoeff() <= 0.0) return 0.0;
  // x^b = b / Gamma(1 - b) * int_0^inf (1 - e^{-tx}) t^{-1-b} dt with b = alpha/2,
  // and E e^{-t sum mu Z^2} = prod (1 + 2 t mu)^{-1/2}.
  const double b = alpha / 2.0;
  auto integrand = [&](double t) {
    if (t <= 0.0) return 0.0;
    double log_laplace = 0.0;
    for (Eigen::Index i = 0; i < mu.size(); ++i) log_laplace -= 0.5 * std::log1p(2.0 * t * std::max(mu[i], 0.0));
    const double v = -std::expm1(log_laplace);
    if (v <= 0.0) return 0.0;
    return std::exp(std::log(v) - (1.0 + b) * std::log(t));
  };
  return b / std::tgamma(1.0 - b) * half_line(integrand);
}

Vector gaussian_quadratic_weighted_diag(const Vector& mu, double alpha) {
  check_alpha(alpha);
  const double p = 1.0 - alpha / 2.0;
  Vector out = Vector::Zero(mu.size());
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0) continue;
    // x^{-p} = 1/Gamma(p) int t^{p-1} e^{-tx} dt; E[W_i^2 e^{-t sum mu W^2}]
    // = (1 + 2 t mu_i)^{-1} prod_j (1 + 2 t mu_j)^{-1/2}.
    auto integrand = [&](double t) {
      if (t <= 0.0) return 0.0;
      double log_val = -std::log1p(2.0 * t * mu[i]);
      for (Eigen::Index j = 0; j < mu.size(); ++j) log_val -= 0.5 * std::log1p(2.0 * t * std::max(mu[j], 0.0));
      return std::exp(log_val + (p - 1.0) * std::log(t));
    };
    out[i] = mu[i] * half_line(integrand) / std::tgamma(p);
  }
  return out;
}

double sample_symmetric(double alpha, Stream& rng) {
  check_alpha(alpha);
  const double v = std::numbers::pi * (rng.uniform() - 0.5);
  if (std::abs(alpha - 1.0) < 1e-12) return std::tan(v);
  const double w = rng.exponential();
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double sample_positive(double beta, Stream& rng) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("stable: positive-stable index must lie in (0, 1)");
  const double u = std::numbers::pi * rng.uniform();
  const double e = rng.exponential();
  return std::sin(beta * u) / std::pow(std::sin(u), 1.0 / beta) *
         std::pow(std::sin((1.0 - beta) * u) / e, (1.0 - beta) / beta);
}

}  // namespace cyllevy::stable
