#include "cyllevy/characteristics.hpp"

#include <cmath>
#include <string>

#include "cyllevy/error.hpp"
#include "cyllevy/stable.hpp"

namespace cyllevy {

namespace {

constexpr std::complex<double> kI(0.0, 1.0);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stable index must lie in (0, 2)");
}

void validate_levy(const LevyMeasureRep& levy, int d) {
  std::visit(Overloaded{
                 [](const ZeroLevy&) {},
                 [d](const AtomicLevy& m) {
                   if (m.atoms.size() != m.rates.size())
                     throw DimensionError("AtomicLevy: atoms and rates differ in length");
                   for (std::size_t j = 0; j < m.atoms.size(); ++j) {
                     if (m.atoms[j].size() != d) throw DimensionError("AtomicLevy: atom dimension");
                     if (!m.atoms[j].allFinite()) throw DomainError("AtomicLevy: non-finite atom");
                     if (!(m.rates[j] > 0.0) || !std::isfinite(m.rates[j]))
                       throw DomainError("AtomicLevy: rates must be positive");
                   }
                 },
                 [d](const DiagonalStableLevy& m) {
                   if (m.alphas.size() != static_cast<std::size_t>(d) ||
                       m.scales.size() != static_cast<std::size_t>(d))
                     throw DimensionError("DiagonalStableLevy: one (alpha, scale) per coordinate");
                   for (std::size_t k = 0; k < m.alphas.size(); ++k) {
                     validate_alpha(m.alphas[k]);
                     if (!(m.scales[k] >= 0.0) || !std::isfinite(m.scales[k]))
                       throw DomainError("DiagonalStableLevy: scales must be nonnegative");
                   }
                 },
                 [](const CanonicalStableLevy& m) { validate_alpha(m.alpha); },
             },
             levy);
}

// E|phi Z|^alpha / E|Z_1|^alpha and the matching small-jump matrix
// E[(phi Z)(phi Z)^T |phi Z|^(alpha-2)] / E|Z_1|^alpha.
struct IsotropicMoments {
  double power = 0.0;
  Matrix second;
};

IsotropicMoments isotropic_moments(const IsotropicStableH& part, bool want_matrix) {
  const Matrix m = part.phi * part.phi.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector mu = eig.eigenvalues().cwiseMax(0.0);
  const double scale = mu.maxCoeff();
  IsotropicMoments out;
  out.second = Matrix::Zero(m.rows(), m.cols());
  if (scale <= 0.0) return out;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu[i] < 1e-14 * scale) mu[i] = 0.0;
  const double norm = stable::gaussian_abs_moment(part.alpha);
  if ((mu.array() > 0.0).count() == 1) {
    // Rank one: |phi Z| = sigma |Z_1|.
    out.power = std::pow(scale, part.alpha / 2.0);
    if (want_matrix) {
      Eigen::Index top = 0;
      mu.maxCoeff(&top);
      const Vector u = eig.eigenvectors().col(top);
      out.second = std::pow(scale, part.alpha / 2.0) * u * u.transpose();
    }
    return out;
  }
  // Work with mu / scale for conditioning; both moments are homogeneous of
  // degree alpha / 2 in mu.
  const double factor = std::pow(scale, part.alpha / 2.0) / norm;
  out.power = factor * stable::gaussian_quadratic_power(mu / scale, part.alpha);
  if (want_matrix) {
    const Vector diag = stable::gaussian_quadratic_weighted_diag(mu / scale, part.alpha);
    out.second = factor * eig.eigenvectors() * diag.asDiagonal() * eig.eigenvectors().transpose();
  }
  return out;
}

std::vector<LevyPartH> pushforward_levy(const LevyMeasureRep& levy, const Matrix& phi) {
  std::vector<LevyPartH> parts;
  std::visit(Overloaded{
                 [](const ZeroLevy&) {},
                 [&](const AtomicLevy& m) {
                   AtomicH out;
                   for (std::size_t j = 0; j < m.atoms.size(); ++j) {
                     Vector image = phi * m.atoms[j];
                     if (image.squaredNorm() == 0.0) continue;
                     out.atoms.push_back(std::move(image));
                     out.rates.push_back(m.rates[j]);
                   }
                   if (!out.atoms.empty()) parts.emplace_back(std::move(out));
                 },
                 [&](const DiagonalStableLevy& m) {
                   for (std::size_t k = 0; k < m.alphas.size(); ++k) {
                     if (m.scales[k] == 0.0) continue;
                     Vector v = m.scales[k] * phi.col(static_cast<Eigen::Index>(k));
                     if (v.squaredNorm() == 0.0) continue;
                     parts.emplace_back(LineStableH{m.alphas[k], std::move(v)});
                   }
                 },
                 [&](const CanonicalStableLevy& m) {
                   if (phi.squaredNorm() > 0.0) parts.emplace_back(IsotropicStableH{m.alpha, phi});
                 },
             },
             levy);
  return parts;
}

bool atomic_symmetric(const AtomicH& m) {
  double scale = 0.0;
  for (const Vector& h : m.atoms) scale = std::max(scale, h.norm());
  const double tol = 1e-12 * std::max(1.0, scale);
  for (const Vector& h : m.atoms) {
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t j = 0; j < m.atoms.size(); ++j) {
      if ((m.atoms[j] - h).norm() <= tol) plus += m.rates[j];
      if ((m.atoms[j] + h).norm() <= tol) minus += m.rates[j];
    }
    if (std::abs(plus - minus) > 1e-12 * std::max(1.0, plus)) return false;
  }
  return true;
}

[[noreturn]] void sampled_unsupported(const char* what) {
  throw UnsupportedError(std::string(what) +
                         ": a tail sample carries no small-jump information");
}

}  // namespace

CylCharacteristics::CylCharacteristics(HVec a, Matrix q, LevyMeasureRep levy)
    : a_(std::move(a)), q_(std::move(q)), levy_(std::move(levy)) {
  const int d = a_.dim();
  if (a_.space() != Space::kG) throw DimensionError("CylCharacteristics: drift must live in G");
  if (q_.rows() != d || q_.cols() != d) throw DimensionError("CylCharacteristics: Q must be d_G x d_G");
  if (!q_.allFinite()) throw DomainError("CylCharacteristics: non-finite Q");
  const double qscale = std::max(1.0, q_.cwiseAbs().maxCoeff());
  if ((q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * qscale)
    throw DomainError("CylCharacteristics: Q must be symmetric");
  q_ = 0.5 * (q_ + q_.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12 * qscale)
    throw DomainError("CylCharacteristics: Q must be positive semidefinite");
  validate_levy(levy_, d);
}

CylCharacteristics CylCharacteristics::zero(int dim_g) {
  return CylCharacteristics(HVec::zero(dim_g, Space::kG), Matrix::Zero(dim_g, dim_g), ZeroLevy{});
}

CylCharacteristics CylCharacteristics::gaussian(Matrix q) {
  const int d = static_cast<int>(q.rows());
  return CylCharacteristics(HVec::zero(d, Space::kG), std::move(q), ZeroLevy{});
}

CylCharacteristics CylCharacteristics::canonical_stable(int dim_g, double alpha) {
  return CylCharacteristics(HVec::zero(dim_g, Space::kG), Matrix::Zero(dim_g, dim_g),
                            CanonicalStableLevy{alpha});
}

CylCharacteristics CylCharacteristics::diagonal_stable(std::vector<double> alphas,
                                                       std::vector<double> scales) {
  const int d = static_cast<int>(alphas.size());
  return CylCharacteristics(HVec::zero(d, Space::kG), Matrix::Zero(d, d),
                            DiagonalStableLevy{std::move(alphas), std::move(scales)});
}

CylCharacteristics CylCharacteristics::compound_poisson(std::vector<Vector> atoms,
                                                        std::vector<double> rates, Vector a) {
  if (atoms.empty()) throw DomainError("compound_poisson: needs at least one atom");
  const auto d = atoms.front().size();
  if (a.size() == 0) a = Vector::Zero(d);
  return CylCharacteristics(HVec(std::move(a), Space::kG), Matrix::Zero(d, d),
                            AtomicLevy{std::move(atoms), std::move(rates)});
}

Vector CylCharacteristics::uncompensated_drift() const {
  Vector drift = a_.coords();
  if (const auto* m = std::get_if<AtomicLevy>(&levy_)) {
    for (std::size_t j = 0; j < m->atoms.size(); ++j)
      if (m->atoms[j].norm() <= 1.0) drift -= m->rates[j] * m->atoms[j];
  }
  return drift;
}

double cylindrical_drift(const CylCharacteristics& chars, const Vector& g) {
  if (g.size() != chars.dim_g()) throw DimensionError("cylindrical_drift: dimension mismatch");
  double value = chars.a().coords().dot(g);
  if (const auto* m = std::get_if<AtomicLevy>(&chars.levy())) {
    for (std::size_t j = 0; j < m->atoms.size(); ++j) {
      const double x = g.dot(m->atoms[j]);
      const double ind_line = std::abs(x) <= 1.0 ? 1.0 : 0.0;
      const double ind_ball = m->atoms[j].norm() <= 1.0 ? 1.0 : 0.0;
      value += m->rates[j] * x * (ind_line - ind_ball);
    }
  }
  return value;
}

std::complex<double> symbol(const CylCharacteristics& chars, const Vector& g) {
  if (g.size() != chars.dim_g()) throw DimensionError("symbol: dimension mismatch");
  std::complex<double> s = kI * cylindrical_drift(chars, g) - 0.5 * g.dot(chars.q() * g);
  std::visit(Overloaded{
                 [](const ZeroLevy&) {},
                 [&](const AtomicLevy& m) {
                   for (std::size_t j = 0; j < m.atoms.size(); ++j) {
                     const double x = g.dot(m.atoms[j]);
                     const double centre = std::abs(x) <= 1.0 ? x : 0.0;
                     s += m.rates[j] * (std::exp(kI * x) - 1.0 - kI * centre);
                   }
                 },
                 [&](const DiagonalStableLevy& m) {
                   for (std::size_t k = 0; k < m.alphas.size(); ++k)
                     s -= std::pow(std::abs(m.scales[k] * g[static_cast<Eigen::Index>(k)]), m.alphas[k]);
                 },
                 [&](const CanonicalStableLevy& m) { s -= std::pow(g.norm(), m.alpha); },
             },
             chars.levy());
  return s;
}

std::complex<double> symbol_eval(const CylCharacteristics& chars, const HVec& g, double t) {
  if (g.space() != Space::kG) throw DimensionError("symbol_eval: argument must live in G");
  return std::exp(t * symbol(chars, g.coords()));
}

GenuineTriplet operator+(const GenuineTriplet& x, const GenuineTriplet& y) {
  if (x.dim_h() != y.dim_h()) throw DimensionError("GenuineTriplet: dimension mismatch in sum");
  GenuineTriplet out{HVec(x.b_theta.coords() + y.b_theta.coords(), Space::kH), x.q_h + y.q_h,
                     x.levy_h};
  out.levy_h.insert(out.levy_h.end(), y.levy_h.begin(), y.levy_h.end());
  return out;
}

GenuineTriplet pushforward(const CylCharacteristics& chars, const HSMap& phi) {
  if (phi.dim_g() != chars.dim_g()) throw DimensionError("pushforward: phi does not act on G");
  const Matrix& f = phi.matrix();
  Vector b = f * chars.a().coords();
  if (const auto* m = std::get_if<AtomicLevy>(&chars.levy())) {
    for (std::size_t j = 0; j < m->atoms.size(); ++j) {
      const Vector image = f * m->atoms[j];
      b += m->rates[j] * theta(image);
      if (m->atoms[j].norm() <= 1.0) b -= m->rates[j] * image;
    }
  }
  return GenuineTriplet{HVec(std::move(b), Space::kH), f * chars.q() * f.transpose(),
                        pushforward_levy(chars.levy(), f)};
}

double first_characteristic_direct(const CylCharacteristics& chars, const HSMap& phi,
                                   const Vector& u) {
  if (phi.dim_g() != chars.dim_g() || u.size() != phi.dim_h())
    throw DimensionError("first_characteristic_direct: dimension mismatch");
  const Matrix& f = phi.matrix();
  double value = cylindrical_drift(chars, f.transpose() * u);
  if (const auto* m = std::get_if<AtomicLevy>(&chars.levy())) {
    for (std::size_t j = 0; j < m->atoms.size(); ++j) {
      const Vector h = f * m->atoms[j];
      const double x = h.dot(u);
      value += m->rates[j] * (theta(h).dot(u) - (std::abs(x) < 1.0 ? x : 0.0));
    }
  }
  return value;
}

std::complex<double> genuine_symbol(const GenuineTriplet& triplet, const Vector& u) {
  if (u.size() != triplet.dim_h()) throw DimensionError("genuine_symbol: dimension mismatch");
  std::complex<double> s = kI * triplet.b_theta.coords().dot(u) - 0.5 * u.dot(triplet.q_h * u);
  for (const auto& part : triplet.levy_h) {
    std::visit(Overloaded{
                   [&](const AtomicH& m) {
                     for (std::size_t j = 0; j < m.atoms.size(); ++j) {
                       const double x = u.dot(m.atoms[j]);
                       s += m.rates[j] * (std::exp(kI * x) - 1.0 - kI * u.dot(theta(m.atoms[j])));
                     }
                   },
                   [&](const IsotropicStableH& m) {
                     s -= std::pow((m.phi.transpose() * u).norm(), m.alpha);
                   },
                   [&](const LineStableH& m) { s -= std::pow(std::abs(m.v.dot(u)), m.alpha); },
                   [](const SampledH&) { sampled_unsupported("genuine_symbol"); },
               },
               part);
  }
  return s;
}

ComposedDrift compose_contraction(const GenuineTriplet& triplet, const Contraction& o) {
  if (o.dim() != triplet.dim_h()) throw DimensionError("compose_contraction: dimension mismatch");
  const Matrix& om = o.matrix();
  Vector b = om * triplet.b_theta.coords();
  bool flagged = false;
  auto add = [&](const Vector& h, double w) {
    if (h.norm() <= 1.0) return;
    b += w * (theta(Vector(om * h)) - om * theta(h));
  };
  for (const auto& part : triplet.levy_h) {
    std::visit(Overloaded{
                   [&](const AtomicH& m) {
                     for (std::size_t j = 0; j < m.atoms.size(); ++j) add(m.atoms[j], m.rates[j]);
                   },
                   [](const IsotropicStableH&) {},
                   [](const LineStableH&) {},
                   [&](const SampledH& m) {
                     if (static_cast<std::size_t>(m.points.cols()) < kMinTailSample) flagged = true;
                     for (Eigen::Index j = 0; j < m.points.cols(); ++j)
                       add(m.points.col(j), m.weights[j]);
                   },
               },
               part);
  }
  return ComposedDrift{HVec(std::move(b), Space::kH), flagged};
}

Matrix s_operator(const Matrix& q_h, const std::vector<LevyPartH>& levy_h) {
  Matrix t = q_h;
  for (const auto& part : levy_h) {
    std::visit(Overloaded{
                   [&](const AtomicH& m) {
                     for (std::size_t j = 0; j < m.atoms.size(); ++j)
                       if (m.atoms[j].norm() <= 1.0)
                         t += m.rates[j] * m.atoms[j] * m.atoms[j].transpose();
                   },
                   [&](const IsotropicStableH& m) {
                     t += stable::small_jump_constant(m.alpha) * isotropic_moments(m, true).second;
                   },
                   [&](const LineStableH& m) {
                     const double n = m.v.norm();
                     t += stable::small_jump_constant(m.alpha) * std::pow(n, m.alpha - 2.0) *
                          m.v * m.v.transpose();
                   },
                   [](const SampledH&) { sampled_unsupported("s_operator"); },
               },
               part);
  }
  return 0.5 * (t + t.transpose());
}

double tail_mass(const GenuineTriplet& triplet) {
  double mass = 0.0;
  for (const auto& part : triplet.levy_h) {
    std::visit(Overloaded{
                   [&](const AtomicH& m) {
                     for (std::size_t j = 0; j < m.atoms.size(); ++j)
                       if (m.atoms[j].norm() > 1.0) mass += m.rates[j];
                   },
                   [&](const IsotropicStableH& m) {
                     mass += stable::tail_constant(m.alpha) * isotropic_moments(m, false).power;
                   },
                   [&](const LineStableH& m) {
                     mass += stable::tail_constant(m.alpha) * std::pow(m.v.norm(), m.alpha);
                   },
                   [&](const SampledH& m) { mass += m.weights.sum(); },
               },
               part);
  }
  return mass;
}

double jump_energy(const GenuineTriplet& triplet) {
  double energy = 0.0;
  for (const auto& part : triplet.levy_h) {
    std::visit(Overloaded{
                   [&](const AtomicH& m) {
                     for (std::size_t j = 0; j < m.atoms.size(); ++j)
                       energy += m.rates[j] * std::min(m.atoms[j].squaredNorm(), 1.0);
                   },
                   [&](const IsotropicStableH& m) {
                     energy += stable::energy_constant(m.alpha) * isotropic_moments(m, false).power;
                   },
                   [&](const LineStableH& m) {
                     energy += stable::energy_constant(m.alpha) * std::pow(m.v.norm(), m.alpha);
                   },
                   [](const SampledH&) { sampled_unsupported("jump_energy"); },
               },
               part);
  }
  return energy;
}

bool is_symmetric(const GenuineTriplet& triplet) {
  double scale = 1.0;
  for (const auto& part : triplet.levy_h)
    if (const auto* m = std::get_if<AtomicH>(&part))
      for (std::size_t j = 0; j < m->atoms.size(); ++j) scale += m->rates[j];
  if (triplet.b_theta.norm() > 1e-12 * scale) return false;
  for (const auto& part : triplet.levy_h) {
    if (std::holds_alternative<SampledH>(part)) return false;
    if (const auto* m = std::get_if<AtomicH>(&part); m != nullptr && !atomic_symmetric(*m))
      return false;
  }
  return true;
}

GenuineTriplet sample_tails(const GenuineTriplet& triplet, std::size_t points, Stream& rng) {
  if (points == 0) throw DomainError("sample_tails: needs at least one point");
  GenuineTriplet out{triplet.b_theta, triplet.q_h, {}};
  const int d = triplet.dim_h();
  const double n = static_cast<double>(points);
  for (const auto& part : triplet.levy_h) {
    if (const auto* iso = std::get_if<IsotropicStableH>(&part)) {
      // lambda_H = int N(0, 2 s phi phi^T) nu(ds) with nu the Levy measure of
      // the positive (alpha/2)-stable law; sample s conditionally on the
      // Gaussian direction so that every point lies outside the unit ball.
      const double beta = iso->alpha / 2.0;
      const double g = std::tgamma(1.0 - beta);
      SampledH s{Matrix::Zero(d, static_cast<Eigen::Index>(points)),
                 Vector::Zero(static_cast<Eigen::Index>(points))};
      Vector z(iso->phi.cols());
      for (std::size_t j = 0; j < points; ++j) {
        for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
        const Vector y = iso->phi * z;
        const double r2 = y.squaredNorm();
        const double u = rng.uniform();
        if (r2 == 0.0) continue;
        const auto col = static_cast<Eigen::Index>(j);
        s.points.col(col) = std::pow(u, -1.0 / iso->alpha) / std::sqrt(r2) * y;
        s.weights[col] = std::pow(2.0 * r2, beta) / g / n;
      }
      out.levy_h.emplace_back(std::move(s));
    } else if (const auto* line = std::get_if<LineStableH>(&part)) {
      const double vn = line->v.norm();
      const double mass = stable::tail_constant(line->alpha) * std::pow(vn, line->alpha);
      SampledH s{Matrix::Zero(d, static_cast<Eigen::Index>(points)),
                 Vector::Constant(static_cast<Eigen::Index>(points), mass / n)};
      for (std::size_t j = 0; j < points; ++j) {
        const double x = std::pow(rng.uniform(), -1.0 / line->alpha) / vn;
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        s.points.col(static_cast<Eigen::Index>(j)) = sign * x * line->v;
      }
      out.levy_h.emplace_back(std::move(s));
    } else {
      out.levy_h.push_back(part);
    }
  }
  return out;
}

}  // namespace cyllevy
