#pragma once

#include "cyllevy/linalg.hpp"
#include "cyllevy/rng.hpp"

namespace cyllevy::stable {

// A symmetric alpha-stable variable Y with E exp(i xi Y) = exp(-|xi|^alpha)
// has Levy density |x|^(-1-alpha) / symbol_constant(alpha).

/// Integral over the real line of (1 - cos x) |x|^(-1-alpha).
double symbol_constant(double alpha);

/// Integral of min(x^2, 1) against the Levy density of Y.
double energy_constant(double alpha);

/// Levy measure of Y outside [-1, 1].
double tail_constant(double alpha);

/// Integral of x^2 over [-1, 1] against the Levy density of Y.
double small_jump_constant(double alpha);

/// E|Z|^alpha for a standard normal Z.
double gaussian_abs_moment(double alpha);

/// E (sum_i mu_i Z_i^2)^(alpha/2) for independent standard normals, mu_i >= 0.
double gaussian_quadratic_power(const Vector& mu, double alpha);

/// Diagonal of E[W W^T (sum mu W^2)^(alpha/2 - 1)] in the eigenbasis, i.e.
/// mu_i E[W_i^2 (sum_j mu_j W_j^2)^(alpha/2 - 1)].
Vector gaussian_quadratic_weighted_diag(const Vector& mu, double alpha);

/// Standard symmetric stable draw (Chambers-Mallows-Stuck).
double sample_symmetric(double alpha, Stream& rng);

/// Positive stable draw with Laplace transform exp(-s^beta), beta in (0, 1)
/// (Kanter's representation).
double sample_positive(double beta, Stream& rng);

}  // namespace cyllevy::stable
