#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "cyllevy/linalg.hpp"
#include "cyllevy/rng.hpp"

namespace cyllevy {

// ---- Cylindrical Levy measures on the G truncation ------------------------

struct ZeroLevy {};

/// Finite measure sum_j r_j delta_{h_j}.
struct AtomicLevy {
  std::vector<Vector> atoms;
  std::vector<double> rates;
};

/// Independent one-dimensional symmetric stable coordinates: coordinate k has
/// symbol -|scale_k g_k|^alpha_k.
struct DiagonalStableLevy {
  std::vector<double> alphas;
  std::vector<double> scales;
};

/// Isotropic standard symmetric alpha-stable: symbol -|g|^alpha.
struct CanonicalStableLevy {
  double alpha = 1.5;
};

using LevyMeasureRep =
    std::variant<ZeroLevy, AtomicLevy, DiagonalStableLevy, CanonicalStableLevy>;

/// Cylindrical characteristics (a, Q, lambda) on the first d_G basis vectors
/// of G. For atomic lambda the drift a is the linear part of the
/// Levy-Khintchine representation centred with 1{|h| <= 1}; the cylindrical
/// drift functional g -> a(g) centred with 1{|<g,h>| <= 1} is recovered by
/// `cylindrical_drift`.
class CylCharacteristics {
 public:
  CylCharacteristics(HVec a, Matrix q, LevyMeasureRep levy);

  static CylCharacteristics zero(int dim_g);
  static CylCharacteristics gaussian(Matrix q);
  static CylCharacteristics canonical_stable(int dim_g, double alpha);
  static CylCharacteristics diagonal_stable(std::vector<double> alphas,
                                            std::vector<double> scales);
  static CylCharacteristics compound_poisson(std::vector<Vector> atoms,
                                             std::vector<double> rates,
                                             Vector a = Vector());

  [[nodiscard]] int dim_g() const { return a_.dim(); }
  [[nodiscard]] const HVec& a() const { return a_; }
  [[nodiscard]] const Matrix& q() const { return q_; }
  [[nodiscard]] const LevyMeasureRep& levy() const { return levy_; }

  /// Drift of the sampled process with jumps left uncompensated, i.e.
  /// a - sum_j r_j h_j 1{|h_j| <= 1} for atomic lambda and a otherwise.
  [[nodiscard]] Vector uncompensated_drift() const;

 private:
  HVec a_;
  Matrix q_;
  LevyMeasureRep levy_;
};

/// a(g) for the cylindrical centring 1{|<g,h>| <= 1}.
double cylindrical_drift(const CylCharacteristics& chars, const Vector& g);

/// Exponent S(g) of the cylindrical symbol.
std::complex<double> symbol(const CylCharacteristics& chars, const Vector& g);

/// exp(t S(g)).
std::complex<double> symbol_eval(const CylCharacteristics& chars, const HVec& g, double t);

// ---- Genuine triplets on the H truncation ---------------------------------

struct AtomicH {
  std::vector<Vector> atoms;
  std::vector<double> rates;
};

/// Image of the canonical stable measure under phi: symbol -|phi^T u|^alpha.
struct IsotropicStableH {
  double alpha;
  Matrix phi;
};

/// Stable measure on the line through v: symbol -|<v, u>|^alpha.
struct LineStableH {
  double alpha;
  Vector v;
};

/// Weighted sample of lambda_H restricted to {|h| > 1}.
struct SampledH {
  Matrix points;  // d_H x n
  Vector weights;
};

using LevyPartH = std::variant<AtomicH, IsotropicStableH, LineStableH, SampledH>;

struct GenuineTriplet {
  HVec b_theta;
  Matrix q_h;
  std::vector<LevyPartH> levy_h;

  [[nodiscard]] int dim_h() const { return b_theta.dim(); }
};

/// Triplet of the sum of two independent H-valued Levy processes.
GenuineTriplet operator+(const GenuineTriplet& x, const GenuineTriplet& y);

/// (b^theta_phi, phi Q phi^T, lambda o phi^{-1}).
GenuineTriplet pushforward(const CylCharacteristics& chars, const HSMap& phi);

/// <b^theta_phi, u> evaluated literally from the cylindrical drift and the
/// integral against lambda o phi^{-1} with the indicator of |<h, u>| < 1.
double first_characteristic_direct(const CylCharacteristics& chars, const HSMap& phi,
                                   const Vector& u);

/// Exponent of the characteristic function of the H-valued law with the
/// given triplet: i<b,u> - <Q u,u>/2 + int (e^{i<u,h>} - 1 - i<u, theta(h)>).
/// Throws UnsupportedError for sampled parts.
std::complex<double> genuine_symbol(const GenuineTriplet& triplet, const Vector& u);

struct ComposedDrift {
  HVec b;
  /// Set when a sampled part has fewer than kMinTailSample points.
  bool flagged = false;
};

inline constexpr std::size_t kMinTailSample = 10000;

/// b^theta_{O phi} = O b^theta_phi + int (theta(O h) - O theta(h)) d lambda_H.
ComposedDrift compose_contraction(const GenuineTriplet& triplet, const Contraction& o);

/// Symmetric PSD matrix Q_H + int_{|h| <= 1} h h^T d lambda_H.
/// Throws UnsupportedError for sampled parts.
Matrix s_operator(const Matrix& q_h, const std::vector<LevyPartH>& levy_h);

/// lambda_H({|h| > 1}).
double tail_mass(const GenuineTriplet& triplet);

/// int min(|h|^2, 1) d lambda_H. Throws UnsupportedError for sampled parts.
double jump_energy(const GenuineTriplet& triplet);

/// True when b^theta vanishes and lambda_H is invariant under h -> -h.
bool is_symmetric(const GenuineTriplet& triplet);

/// Replace every closed-form stable part by an exact weighted sample of its
/// restriction to {|h| > 1}; atomic parts are kept.
GenuineTriplet sample_tails(const GenuineTriplet& triplet, std::size_t points, Stream& rng);

}  // namespace cyllevy
