#include "cyllevy/limits.hpp"

#include <algorithm>
#include <cmath>

#include "cyllevy/error.hpp"
#include "cyllevy/parallel.hpp"

namespace cyllevy {

namespace {

constexpr std::size_t kBlock = 64;

struct VecMoments {
  Vector sum;
  Vector sum_sq;
  std::size_t n = 0;

  explicit VecMoments(int d) : sum(Vector::Zero(d)), sum_sq(Vector::Zero(d)) {}
  void add(const Vector& x) {
    sum += x;
    sum_sq += x.cwiseProduct(x);
    ++n;
  }
  void merge(const VecMoments& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    n += o.n;
  }
  [[nodiscard]] VectorEstimate estimate() const {
    const double nn = static_cast<double>(n);
    Vector mean = sum / nn;
    Vector var = ((sum_sq - nn * mean.cwiseProduct(mean)) / std::max(1.0, nn - 1.0)).cwiseMax(0.0);
    return {mean, (var / nn).cwiseSqrt()};
  }
};

struct SeriesAccumulator {
  std::vector<VecMoments> b;
  std::vector<Moments> k;
  std::vector<VecMoments> db;
  std::vector<Moments> dk;

  SeriesAccumulator(std::size_t levels, int d)
      : b(levels, VecMoments(d)), k(levels), db(levels > 0 ? levels - 1 : 0, VecMoments(d)),
        dk(levels > 0 ? levels - 1 : 0) {}

  void merge(const SeriesAccumulator& o) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      b[i].merge(o.b[i]);
      k[i].merge(o.k[i]);
    }
    for (std::size_t i = 0; i < db.size(); ++i) {
      db[i].merge(o.db[i]);
      dk[i].merge(o.dk[i]);
    }
  }
};

}  // namespace

std::vector<int> default_levels() { return {2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::vector<PartitionLimitSeries> partition_limits(const Driver& driver,
                                                   const std::vector<HSMap>& phis, double s,
                                                   double t, const std::vector<int>& levels,
                                                   std::size_t mc_samples, const Stream& rng) {
  if (levels.empty() || !std::is_sorted(levels.begin(), levels.end()) ||
      std::adjacent_find(levels.begin(), levels.end()) != levels.end() || levels.front() < 0 ||
      levels.back() > 20)
    throw DomainError("partition_limits: levels must be strictly increasing within [0, 20]");
  if (mc_samples < 1000) throw DomainError("partition_limits: need at least 1000 replicas");
  for (const HSMap& phi : phis)
    if (phi.dim_g() != driver.dim_g()) throw DimensionError("partition_limits: phi does not act on G");
  const Partition fine = Partition::dyadic(s, t, levels.back());
  const std::size_t nl = levels.size();

  const std::size_t blocks = (mc_samples + kBlock - 1) / kBlock;
  std::vector<std::vector<SeriesAccumulator>> partial(blocks);
  parallel_blocks(mc_samples, kBlock, [&](std::size_t block, std::size_t begin, std::size_t end) {
    auto& acc = partial[block];
    for (const HSMap& phi : phis) acc.emplace_back(nl, phi.dim_h());
    std::vector<Vector> bval(nl);
    std::vector<double> kval(nl);
    for (std::size_t r = begin; r < end; ++r) {
      Stream stream = rng.split(r);
      const Matrix g = sample_g_path(driver, fine, stream);
      for (std::size_t p = 0; p < phis.size(); ++p) {
        Matrix inc = phis[p].matrix() * g;
        Eigen::Index cols = inc.cols();
        int level = levels.back();
        for (std::size_t li = nl; li-- > 0;) {
          while (level > levels[li]) {
            cols /= 2;
            for (Eigen::Index c = 0; c < cols; ++c) inc.col(c) = inc.col(2 * c) + inc.col(2 * c + 1);
            --level;
          }
          Vector bs = Vector::Zero(inc.rows());
          double ks = 0.0;
          for (Eigen::Index c = 0; c < cols; ++c) {
            const auto col = inc.col(c);
            const double n2 = col.squaredNorm();
            bs += n2 <= 1.0 ? Vector(col) : Vector(col / std::sqrt(n2));
            ks += std::min(n2, 1.0);
          }
          bval[li] = std::move(bs);
          kval[li] = ks;
        }
        auto& a = acc[p];
        for (std::size_t li = 0; li < nl; ++li) {
          a.b[li].add(bval[li]);
          a.k[li].add(kval[li]);
          if (li + 1 < nl) {
            a.db[li].add(bval[li + 1] - bval[li]);
            a.dk[li].add(kval[li + 1] - kval[li]);
          }
        }
      }
    }
  });

  std::vector<PartitionLimitSeries> out;
  for (std::size_t p = 0; p < phis.size(); ++p) {
    SeriesAccumulator total(nl, phis[p].dim_h());
    for (const auto& blk : partial) total.merge(blk[p]);
    PartitionLimitSeries series;
    series.levels = levels;
    for (std::size_t li = 0; li < nl; ++li) {
      series.b.push_back(total.b[li].estimate());
      series.k.push_back(total.k[li].estimate());
      if (li + 1 < nl) {
        series.b_increments.push_back(total.db[li].estimate());
        series.k_increments.push_back(total.dk[li].estimate());
      }
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<VectorEstimate> partition_estimate_b(const Driver& driver, const HSMap& phi, double s,
                                                 double t, const std::vector<int>& levels,
                                                 std::size_t mc_samples, const Stream& rng) {
  return partition_limits(driver, {phi}, s, t, levels, mc_samples, rng).front().b;
}

std::vector<ScalarEstimate> partition_estimate_k(const Driver& driver, const HSMap& phi, double s,
                                                 double t, const std::vector<int>& levels,
                                                 std::size_t mc_samples, const Stream& rng) {
  return partition_limits(driver, {phi}, s, t, levels, mc_samples, rng).front().k;
}

}  // namespace cyllevy
