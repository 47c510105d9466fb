#include "cyllevy/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cyllevy/error.hpp"

namespace cyllevy {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": non-finite entry");
}

}  // namespace

HVec::HVec(Vector coords, Space space) : coords_(std::move(coords)), space_(space) {
  if (coords_.size() < 1) throw DimensionError("HVec: dimension must be >= 1");
  require_finite(coords_, "HVec");
}

HVec HVec::zero(int dim, Space space) { return HVec(Vector::Zero(dim), space); }

HVec HVec::basis(int dim, int index, Space space) {
  if (index < 0 || index >= dim) throw DimensionError("HVec::basis: index out of range");
  Vector v = Vector::Zero(dim);
  v[index] = 1.0;
  return HVec(std::move(v), space);
}

HSMap::HSMap(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) throw DimensionError("HSMap: empty matrix");
  require_finite(matrix_, "HSMap");
  hs_norm_ = matrix_.norm();
}

HSMap HSMap::zero(int dim_h, int dim_g) { return HSMap(Matrix::Zero(dim_h, dim_g)); }

HVec HSMap::apply(const HVec& g) const {
  if (g.space() != Space::kG || g.dim() != dim_g())
    throw DimensionError("HSMap::apply: argument is not in the G truncation");
  return HVec(matrix_ * g.coords(), Space::kH);
}

HSMap operator+(const HSMap& a, const HSMap& b) {
  if (a.dim_h() != b.dim_h() || a.dim_g() != b.dim_g())
    throw DimensionError("HSMap: shape mismatch in sum");
  return HSMap(a.matrix_ + b.matrix_);
}

HSMap operator-(const HSMap& a, const HSMap& b) {
  if (a.dim_h() != b.dim_h() || a.dim_g() != b.dim_g())
    throw DimensionError("HSMap: shape mismatch in difference");
  return HSMap(a.matrix_ - b.matrix_);
}

HSMap operator*(double s, const HSMap& a) { return HSMap(s * a.matrix_); }

Contraction::Contraction(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
    throw DimensionError("Contraction: matrix must be square");
  require_finite(matrix_, "Contraction");
  if (spectral_norm(matrix_) > 1.0 + 1e-9)
    throw DomainError("Contraction: operator norm exceeds 1");
}

Contraction Contraction::identity(int dim) { return Contraction(Matrix::Identity(dim, dim)); }

HSMap operator*(const Contraction& o, const HSMap& phi) {
  if (o.dim() != phi.dim_h()) throw DimensionError("Contraction * HSMap: shape mismatch");
  return HSMap(o.matrix() * phi.matrix());
}

Partition::Partition(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw DomainError("Partition: needs at least two points");
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (!std::isfinite(points_[i]) || !std::isfinite(points_[i + 1]) ||
        !(points_[i] < points_[i + 1]))
      throw DomainError("Partition: points must be finite and strictly increasing");
  }
}

Partition Partition::dyadic(double s, double t, int level) {
  if (level < 0 || level > 30) throw DomainError("Partition::dyadic: level out of range");
  return uniform(s, t, 1 << level);
}

Partition Partition::uniform(double s, double t, int intervals) {
  if (intervals < 1 || !(s < t)) throw DomainError("Partition::uniform: bad arguments");
  std::vector<double> pts(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i)
    pts[static_cast<std::size_t>(i)] = s + (t - s) * static_cast<double>(i) / intervals;
  pts.back() = t;
  return Partition(std::move(pts));
}

double Partition::mesh() const {
  double m = 0.0;
  for (std::size_t i = 0; i < intervals(); ++i) m = std::max(m, length(i));
  return m;
}

std::size_t Partition::locate(double t) const {
  if (t <= points_.front()) return 0;
  if (t > points_.back()) throw DomainError("Partition::locate: time beyond horizon");
  auto it = std::lower_bound(points_.begin(), points_.end(), t);
  return static_cast<std::size_t>(it - points_.begin()) - 1;
}

bool Partition::refines(const Partition& coarse) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(end()));
  for (double p : coarse.points()) {
    auto it = std::lower_bound(points_.begin(), points_.end(), p - tol);
    if (it == points_.end() || std::abs(*it - p) > tol) return false;
  }
  return true;
}

Partition Partition::merge(const Partition& a, const Partition& b) {
  const double tol = 1e-12 * std::max(1.0, std::abs(a.end()));
  if (std::abs(a.start() - b.start()) > tol || std::abs(a.end() - b.end()) > tol)
    throw DomainError("Partition::merge: partitions cover different intervals");
  std::vector<double> all;
  all.reserve(a.points_.size() + b.points_.size());
  std::merge(a.points_.begin(), a.points_.end(), b.points_.begin(), b.points_.end(),
             std::back_inserter(all));
  std::vector<double> out;
  out.reserve(all.size());
  for (double p : all)
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  out.back() = a.end();
  return Partition(std::move(out));
}

Vector theta(const Vector& h) {
  const double n = h.norm();
  if (n <= 1.0) return h;
  return h / n;
}

HVec theta(const HVec& h) { return HVec(theta(h.coords()), h.space()); }

HSMap project_basis(const HSMap& phi, int n) {
  if (n < 0 || n > phi.dim_g()) throw DomainError("project_basis: n out of range");
  Matrix m = phi.matrix();
  m.rightCols(phi.dim_g() - n).setZero();
  return HSMap(std::move(m));
}

Contraction rotation_align(const HVec& h, const HVec& e) {
  if (h.dim() != e.dim()) throw DimensionError("rotation_align: dimension mismatch");
  if (std::abs(e.norm() - 1.0) > 1e-9) throw DomainError("rotation_align: e must be a unit vector");
  const int d = h.dim();
  const Vector& hv = h.coords();
  const Vector& ev = e.coords();
  const double hn = hv.norm();
  const double along = hv.dot(ev);
  Vector w = hv - along * ev;
  const double wn = w.norm();
  if (hn == 0.0 || wn <= 1e-14 * hn) {
    const double sign = along < 0.0 ? -1.0 : 1.0;
    return Contraction(sign * Matrix::Identity(d, d));
  }
  // Re-orthogonalize: w loses orthogonality to e when h is nearly parallel.
  Vector v = w / wn;
  v -= v.dot(ev) * ev;
  v.normalize();
  const double r_len = std::hypot(along, hv.dot(v));
  const double c = along / r_len;
  const double s = hv.dot(v) / r_len;
  // Rotation by -angle(h, e) in the plane spanned by e and v.
  Matrix r = Matrix::Identity(d, d);
  r += (c - 1.0) * (ev * ev.transpose() + v * v.transpose());
  r += s * (ev * v.transpose() - v * ev.transpose());
  return Contraction(std::move(r));
}

Matrix haar_orthogonal(Stream& rng, int dim) {
  Matrix g(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Vector random_unit_vector(Stream& rng, int dim) {
  Vector v(dim);
  double n = 0.0;
  while (n < 1e-12) {
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    n = v.norm();
  }
  return v / n;
}

Contraction scaled_svd_contraction(const Matrix& u, std::span<const double> s, const Matrix& v) {
  Vector sv(static_cast<Eigen::Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i) sv[static_cast<Eigen::Index>(i)] = std::clamp(s[i], 0.0, 1.0);
  return Contraction(u * sv.asDiagonal() * v.transpose());
}

Contraction sample_contraction(Stream& rng, ContractionMode mode, int dim) {
  switch (mode) {
    case ContractionMode::kOrthogonal:
      return Contraction(haar_orthogonal(rng, dim));
    case ContractionMode::kScaledSvd: {
      const Matrix u = haar_orthogonal(rng, dim);
      const Matrix v = haar_orthogonal(rng, dim);
      std::vector<double> s(static_cast<std::size_t>(dim));
      for (double& x : s) x = rng.uniform();
      return scaled_svd_contraction(u, s, v);
    }
    case ContractionMode::kRankOne: {
      const Vector x = random_unit_vector(rng, dim);
      const Vector y = random_unit_vector(rng, dim);
      return Contraction(rng.uniform() * x * y.transpose());
    }
  }
  throw DomainError("sample_contraction: unknown mode");
}

double spectral_norm(const Matrix& a) {
  const Eigen::Index n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  const Matrix ata = a.transpose() * a;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * std::sin(1.0 + 2.0 * static_cast<double>(i));
  v.normalize();
  double lambda = 0.0;
  bool converged = false;
  const int max_iter = 10 * static_cast<int>(a.rows());
  for (int it = 0; it < max_iter; ++it) {
    Vector w = ata * v;
    const double rayleigh = v.dot(w);
    const double wn = w.norm();
    if (wn == 0.0) {
      // Start vector in the kernel; restart from the column with largest norm.
      Eigen::Index best = 0;
      a.colwise().norm().maxCoeff(&best);
      if (a.col(best).norm() == 0.0) return 0.0;
      v = Vector::Unit(n, best);
      continue;
    }
    v = w / wn;
    converged = std::abs(rayleigh - lambda) <= 1e-10 * rayleigh;
    lambda = rayleigh;
    if (converged) break;
  }
  if (!converged) return Eigen::JacobiSVD<Matrix>(a).singularValues()[0];
  return std::sqrt(lambda);
}

}  // namespace cyllevy
