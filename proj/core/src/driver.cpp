#include "cyllevy/driver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cyllevy/error.hpp"
#include "cyllevy/stable.hpp"

namespace cyllevy {

std::string_view to_string(DriverKind kind) {
  switch (kind) {
    case DriverKind::kGaussian: return "gaussian";
    case DriverKind::kCanonicalStable: return "canonical-stable";
    case DriverKind::kDiagonalStable: return "diagonal-stable";
    case DriverKind::kCompoundPoisson: return "compound-poisson";
    case DriverKind::kSum: return "sum";
  }
  return "unknown";
}

DriverKind driver_kind_from_string(std::string_view name) {
  for (DriverKind k : {DriverKind::kGaussian, DriverKind::kCanonicalStable,
                       DriverKind::kDiagonalStable, DriverKind::kCompoundPoisson, DriverKind::kSum})
    if (to_string(k) == name) return k;
  throw FormatError("unknown driver kind '" + std::string(name) + "'");
}

DriverKind kind_of(const CylCharacteristics& chars) {
  switch (chars.levy().index()) {
    case 0: return DriverKind::kGaussian;
    case 1: return DriverKind::kCompoundPoisson;
    case 2: return DriverKind::kDiagonalStable;
    default: return DriverKind::kCanonicalStable;
  }
}

Driver::Component Driver::prepare(CylCharacteristics chars) {
  Component c{chars, Matrix(), chars.uncompensated_drift(), {}};
  if (chars.q().squaredNorm() > 0.0) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(chars.q());
    c.gauss_factor = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  if (const auto* m = std::get_if<AtomicLevy>(&chars.levy())) {
    double acc = 0.0;
    for (double r : m->rates) c.cumulative_rates.push_back(acc += r);
  }
  return c;
}

Driver::Driver(CylCharacteristics chars) : kind_(kind_of(chars)) {
  components_.push_back(prepare(std::move(chars)));
}

Driver Driver::sum(const std::vector<Driver>& parts) {
  if (parts.empty()) throw DomainError("Driver::sum: no components");
  Driver out;
  out.kind_ = DriverKind::kSum;
  for (const Driver& p : parts) {
    if (p.dim_g() != parts.front().dim_g()) throw DimensionError("Driver::sum: dimension mismatch");
    out.components_.insert(out.components_.end(), p.components_.begin(), p.components_.end());
  }
  return out;
}

const CylCharacteristics& Driver::chars() const {
  if (components_.size() != 1) throw UnsupportedError("Driver::chars: sum driver has several components");
  return components_.front().chars;
}

GenuineTriplet Driver::triplet(const HSMap& phi) const {
  GenuineTriplet t = pushforward(components_.front().chars, phi);
  for (std::size_t i = 1; i < components_.size(); ++i) t = t + pushforward(components_[i].chars, phi);
  return t;
}

std::complex<double> Driver::symbol(const Vector& g) const {
  std::complex<double> s = 0.0;
  for (const auto& c : components_) s += cyllevy::symbol(c.chars, g);
  return s;
}

Vector Driver::sample_g_increment(double dt, Stream& rng, int* jumps) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("sample_g_increment: dt must be positive");
  const int d = dim_g();
  Vector x = Vector::Zero(d);
  for (const auto& c : components_) {
    x += dt * c.drift;
    if (c.gauss_factor.size() > 0) {
      Vector z(d);
      for (int i = 0; i < d; ++i) z[i] = rng.normal();
      x += std::sqrt(dt) * (c.gauss_factor * z);
    }
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, AtomicLevy>) {
            const double total = c.cumulative_rates.back();
            const auto n = rng.poisson(dt * total);
            for (std::uint64_t k = 0; k < n; ++k) {
              const double u = rng.uniform() * total;
              auto it = std::upper_bound(c.cumulative_rates.begin(), c.cumulative_rates.end(), u);
              const auto j = std::min<std::size_t>(
                  static_cast<std::size_t>(it - c.cumulative_rates.begin()), m.atoms.size() - 1);
              x += m.atoms[j];
            }
            if (jumps != nullptr) *jumps += static_cast<int>(n);
          } else if constexpr (std::is_same_v<T, DiagonalStableLevy>) {
            for (int k = 0; k < d; ++k) {
              const auto kk = static_cast<std::size_t>(k);
              if (m.scales[kk] == 0.0) continue;
              x[k] += m.scales[kk] * std::pow(dt, 1.0 / m.alphas[kk]) *
                      stable::sample_symmetric(m.alphas[kk], rng);
            }
          } else if constexpr (std::is_same_v<T, CanonicalStableLevy>) {
            const double a = stable::sample_positive(m.alpha / 2.0, rng);
            const double s = std::sqrt(2.0 * std::pow(dt, 2.0 / m.alpha) * a);
            for (int i = 0; i < d; ++i) x[i] += s * rng.normal();
          }
        },
        c.chars.levy());
  }
  return x;
}

HVec sample_increment(const Driver& driver, const HSMap& phi, double dt, Stream& rng) {
  if (phi.dim_g() != driver.dim_g()) throw DimensionError("sample_increment: phi does not act on G");
  return HVec(phi.matrix() * driver.sample_g_increment(dt, rng), Space::kH);
}

Matrix sample_g_path(const Driver& driver, const Partition& partition, Stream& rng,
                     std::vector<int>* jump_counts) {
  const auto n = partition.intervals();
  Matrix out(driver.dim_g(), static_cast<Eigen::Index>(n));
  if (jump_counts != nullptr) jump_counts->assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    int* jumps = jump_counts != nullptr ? &(*jump_counts)[i] : nullptr;
    out.col(static_cast<Eigen::Index>(i)) = driver.sample_g_increment(partition.length(i), rng, jumps);
  }
  return out;
}

PathTable sample_path(const Driver& driver, const HSMap& phi, const Partition& partition,
                      Stream& rng) {
  if (phi.dim_g() != driver.dim_g()) throw DimensionError("sample_path: phi does not act on G");
  PathTable table{partition, Matrix(), {}, rng.key()};
  table.increments = phi.matrix() * sample_g_path(driver, partition, rng, &table.jump_counts);
  return table;
}

PathTable aggregate(const PathTable& fine, const Partition& coarse) {
  if (!fine.partition.refines(coarse)) throw DomainError("aggregate: partition is not refined by the path");
  PathTable out{coarse, Matrix::Zero(fine.increments.rows(), static_cast<Eigen::Index>(coarse.intervals())),
                std::vector<int>(coarse.intervals(), 0), fine.seed};
  const auto& pts = fine.partition.points();
  for (std::size_t i = 0; i < fine.partition.intervals(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    const std::size_t j = coarse.locate(mid);
    out.increments.col(static_cast<Eigen::Index>(j)) += fine.increments.col(static_cast<Eigen::Index>(i));
    if (!fine.jump_counts.empty()) out.jump_counts[j] += fine.jump_counts[i];
  }
  return out;
}

DecoupledDriver decoupled_driver(const Driver& driver, const Stream& original, Stream fresh) {
  if (fresh.key() == original.key())
    throw DomainError("decoupled_driver: the fresh stream shares the original stream's key");
  return DecoupledDriver(driver, std::move(fresh));
}

}  // namespace cyllevy
