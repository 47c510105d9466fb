#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "cyllevy/rng.hpp"

namespace cyllevy {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default truncation dimensions of the integrator space G and the target
/// space H.
inline constexpr int kDefaultDimG = 8;
inline constexpr int kDefaultDimH = 8;

enum class Space { kG, kH };

/// Element of a truncated Hilbert space, tagged with the space it lives in.
class HVec {
 public:
  HVec(Vector coords, Space space);

  static HVec zero(int dim, Space space);
  static HVec basis(int dim, int index, Space space);

  [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()); }
  [[nodiscard]] const Vector& coords() const { return coords_; }
  [[nodiscard]] Space space() const { return space_; }
  [[nodiscard]] double norm() const { return coords_.norm(); }

 private:
  Vector coords_;
  Space space_;
};

/// Hilbert-Schmidt operator G -> H on the truncated spaces, stored as a
/// dense d_H x d_G matrix with its Frobenius norm cached.
class HSMap {
 public:
  explicit HSMap(Matrix matrix);

  static HSMap zero(int dim_h, int dim_g);

  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] int dim_h() const { return static_cast<int>(matrix_.rows()); }
  [[nodiscard]] int dim_g() const { return static_cast<int>(matrix_.cols()); }
  [[nodiscard]] double hs_norm() const { return hs_norm_; }
  [[nodiscard]] bool is_zero() const { return hs_norm_ == 0.0; }

  [[nodiscard]] HVec apply(const HVec& g) const;

  friend HSMap operator+(const HSMap& a, const HSMap& b);
  friend HSMap operator-(const HSMap& a, const HSMap& b);
  friend HSMap operator*(double s, const HSMap& a);

 private:
  Matrix matrix_;
  double hs_norm_;
};

/// Linear operator H -> H with operator norm at most one.
class Contraction {
 public:
  /// Throws DomainError when the spectral norm exceeds 1 + 1e-9.
  explicit Contraction(Matrix matrix);

  static Contraction identity(int dim);

  [[nodiscard]] const Matrix& matrix() const { return matrix_; }
  [[nodiscard]] int dim() const { return static_cast<int>(matrix_.rows()); }

 private:
  Matrix matrix_;
};

HSMap operator*(const Contraction& o, const HSMap& phi);

/// Strictly increasing time grid s = t_0 < ... < t_N = t.
class Partition {
 public:
  explicit Partition(std::vector<double> points);

  /// 2^level equal intervals of [s, t].
  static Partition dyadic(double s, double t, int level);
  static Partition uniform(double s, double t, int intervals);

  [[nodiscard]] const std::vector<double>& points() const { return points_; }
  [[nodiscard]] std::size_t intervals() const { return points_.size() - 1; }
  [[nodiscard]] double start() const { return points_.front(); }
  [[nodiscard]] double end() const { return points_.back(); }
  [[nodiscard]] double length(std::size_t i) const {
    return points_[i + 1] - points_[i];
  }
  [[nodiscard]] double mesh() const;

  /// Index of the interval (t_i, t_{i+1}] containing t; t = start maps to 0.
  [[nodiscard]] std::size_t locate(double t) const;

  /// True when every point of `coarse` is a point of this partition.
  [[nodiscard]] bool refines(const Partition& coarse) const;

  /// Union of the two point sets. Both must cover the same interval.
  static Partition merge(const Partition& a, const Partition& b);

 private:
  std::vector<double> points_;
};

/// Truncation function: identity on the closed unit ball, radial projection
/// onto the unit sphere outside it.
Vector theta(const Vector& h);
HVec theta(const HVec& h);

/// Phi composed with the projection onto the first n basis vectors of G.
HSMap project_basis(const HSMap& phi, int n);

/// Orthogonal map R with R h = |h| e that fixes the orthogonal complement of
/// span{e, h}. When h is a multiple of e (including h = 0) returns
/// sgn(lambda) * identity with sgn(0) = +1. Requires |e| = 1.
Contraction rotation_align(const HVec& h, const HVec& e);

enum class ContractionMode { kOrthogonal, kScaledSvd, kRankOne };

/// Random element of the closed unit ball of L(H).
///  - kOrthogonal: Haar-distributed orthogonal matrix.
///  - kScaledSvd: U diag(s) V^T with Haar U, V and s uniform in [0, 1]^d.
///  - kRankOne: x y^T with x, y uniform on the unit sphere, scaled by U[0,1].
Contraction sample_contraction(Stream& rng, ContractionMode mode, int dim);

/// U diag(s) V^T for caller-supplied factors; s is clamped into [0, 1].
Contraction scaled_svd_contraction(const Matrix& u, std::span<const double> s,
                                   const Matrix& v);

Matrix haar_orthogonal(Stream& rng, int dim);
Vector random_unit_vector(Stream& rng, int dim);

/// Largest singular value by power iteration on A^T A with Rayleigh
/// quotients (relative tolerance 1e-10, at most 10 * rows iterations). When
/// the iteration has not converged within that budget the exact value from
/// a singular value decomposition is returned.
double spectral_norm(const Matrix& a);

}  // namespace cyllevy
