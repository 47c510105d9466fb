#include "cyllevy/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "cyllevy/error.hpp"
#include "cyllevy/io.hpp"
#include "cyllevy/parallel.hpp"

namespace cyllevy {

namespace {

constexpr std::size_t kBlock = 64;

std::pair<int, int> shape(const HSMap& v) { return {v.dim_h(), v.dim_g()}; }
std::pair<int, int> shape(const Contraction& v) { return {v.dim(), v.dim()}; }

template <class Value>
std::size_t select_rule(const std::vector<Rule<Value>>& rules, std::size_t i, const PathView& history) {
  std::size_t hits = 0;
  std::size_t index = 0;
  for (std::size_t k = 0; k < rules.size(); ++k) {
    const auto& when = rules[k].when;
    if (std::all_of(when.begin(), when.end(), [&](const Predicate& p) { return p.eval(history, i); })) {
      ++hits;
      index = k;
    }
  }
  if (hits != 1)
    throw DomainError("step process: rules of interval " + std::to_string(i) + " are not exhaustive and exclusive (" +
                      std::to_string(hits) + " hold)");
  return index;
}

ScalarEstimate estimate_of(const std::vector<double>& xs) {
  Moments m;
  for (double x : xs) m.add(x);
  return m.estimate();
}

}  // namespace

// ---- predicates ----------------------------------------------------------------

double PathView::cumulative(int coord, std::size_t k) const {
  if (prefix_cache.size() == 0) {
    prefix_cache.resize(g_increments.rows(), g_increments.cols() + 1);
    prefix_cache.col(0).setZero();
    for (Eigen::Index j = 0; j < g_increments.cols(); ++j)
      prefix_cache.col(j + 1) = prefix_cache.col(j) + g_increments.col(j);
  }
  return prefix_cache(coord, static_cast<Eigen::Index>(k));
}

Predicate Predicate::always() { return {}; }

Predicate Predicate::coord_sign(int interval, int coord) {
  Predicate p;
  p.kind = Kind::kCoordSign;
  p.interval = interval;
  p.coord = coord;
  return p;
}

Predicate Predicate::coord_above(int interval, int coord, double threshold) {
  Predicate p;
  p.kind = Kind::kCoordAbove;
  p.interval = interval;
  p.coord = coord;
  p.threshold = threshold;
  return p;
}

Predicate Predicate::cumulative_above(int coord, double threshold) {
  Predicate p;
  p.kind = Kind::kCumulativeAbove;
  p.coord = coord;
  p.threshold = threshold;
  return p;
}

Predicate Predicate::cumulative_until(int k, int coord, double threshold) {
  Predicate p;
  p.kind = Kind::kCumulativeUntil;
  p.interval = k;
  p.coord = coord;
  p.threshold = threshold;
  return p;
}

Predicate Predicate::jumps_at_least(int interval, int count) {
  Predicate p;
  p.kind = Kind::kJumpsAtLeast;
  p.interval = interval;
  p.count = count;
  return p;
}

Predicate Predicate::operator!() const {
  Predicate p = *this;
  p.negate = !negate;
  return p;
}

bool Predicate::adapted_at(std::size_t i) const {
  switch (kind) {
    case Kind::kAlways:
    case Kind::kCumulativeAbove:
      return true;
    case Kind::kCumulativeUntil:
      return interval >= 0 && static_cast<std::size_t>(interval) <= i;
    default:
      return interval >= 0 && static_cast<std::size_t>(interval) < i;
  }
}

bool Predicate::eval(const PathView& history, std::size_t i) const {
  if (!adapted_at(i)) throw DomainError("predicate reads the future: " + describe());
  const Matrix& g = history.g_increments;
  if (kind != Kind::kAlways && kind != Kind::kJumpsAtLeast && (coord < 0 || coord >= g.rows()))
    throw DimensionError("predicate coordinate out of range: " + describe());
  bool value = true;
  switch (kind) {
    case Kind::kAlways:
      break;
    case Kind::kCoordSign:
      value = g(coord, interval) > 0.0;
      break;
    case Kind::kCoordAbove:
      value = g(coord, interval) > threshold;
      break;
    case Kind::kCumulativeAbove:
      value = history.cumulative(coord, i) > threshold;
      break;
    case Kind::kCumulativeUntil:
      value = history.cumulative(coord, static_cast<std::size_t>(interval)) > threshold;
      break;
    case Kind::kJumpsAtLeast:
      value = history.jumps.at(static_cast<std::size_t>(interval)) >= count;
      break;
  }
  return value != negate;
}

std::string Predicate::describe() const {
  std::string s;
  switch (kind) {
    case Kind::kAlways:
      s = "always";
      break;
    case Kind::kCoordSign:
      s = "sign(dL[" + std::to_string(interval) + "]_" + std::to_string(coord) + ")>0";
      break;
    case Kind::kCoordAbove:
      s = "dL[" + std::to_string(interval) + "]_" + std::to_string(coord) + ">" + format_double(threshold);
      break;
    case Kind::kCumulativeAbove:
      s = "L_" + std::to_string(coord) + ">" + format_double(threshold);
      break;
    case Kind::kCumulativeUntil:
      s = "L(t_" + std::to_string(interval) + ")_" + std::to_string(coord) + ">" + format_double(threshold);
      break;
    case Kind::kJumpsAtLeast:
      s = "jumps[" + std::to_string(interval) + "]>=" + std::to_string(count);
      break;
  }
  return negate ? "not " + s : s;
}

// ---- adapted step processes --------------------------------------------------------

template <class Value>
AdaptedStep<Value>::AdaptedStep(Partition partition, std::vector<std::vector<Rule<Value>>> rules)
    : partition_(std::move(partition)), rules_(std::move(rules)) {
  if (rules_.size() != partition_.intervals())
    throw DimensionError("step process: need one rule set per interval");
  const auto reference = shape(rules_.at(0).at(0).value);
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    if (rules_[i].empty()) throw DomainError("step process: empty rule set");
    for (const auto& rule : rules_[i]) {
      if (shape(rule.value) != reference) throw DimensionError("step process: values differ in shape");
      for (const Predicate& p : rule.when)
        if (!p.adapted_at(i)) throw DomainError("step process: predicate is not adapted: " + p.describe());
    }
  }
}

template <class Value>
AdaptedStep<Value> AdaptedStep<Value>::deterministic(Partition partition, std::vector<Value> values) {
  std::vector<std::vector<Rule<Value>>> rules;
  rules.reserve(values.size());
  for (auto& v : values) rules.push_back({Rule<Value>{{}, std::move(v)}});
  return AdaptedStep(std::move(partition), std::move(rules));
}

template <class Value>
std::size_t AdaptedStep<Value>::select_index(std::size_t i, const PathView& history) const {
  return select_rule(rules_.at(i), i, history);
}

template class AdaptedStep<HSMap>;
template class AdaptedStep<Contraction>;

StepProcess to_process(const StepFunction& psi) {
  std::vector<HSMap> values(psi.values().begin() + 1, psi.values().end());
  return StepProcess::deterministic(psi.partition(), std::move(values));
}

int dim_h(const StepProcess& psi) { return psi.rules(0).front().value.dim_h(); }
int dim_g(const StepProcess& psi) { return psi.rules(0).front().value.dim_g(); }

StepProcess operator-(const StepProcess& a, const StepProcess& b) {
  if (a.partition().points() != b.partition().points())
    throw DomainError("step process difference: partitions differ");
  std::vector<std::vector<Rule<HSMap>>> rules(a.intervals());
  for (std::size_t i = 0; i < a.intervals(); ++i) {
    const bool single_a = a.rules(i).size() == 1;
    const bool single_b = b.rules(i).size() == 1;
    for (const auto& ra : a.rules(i))
      for (const auto& rb : b.rules(i)) {
        std::vector<Predicate> when = single_a ? std::vector<Predicate>{} : ra.when;
        if (!single_b) when.insert(when.end(), rb.when.begin(), rb.when.end());
        rules[i].push_back({std::move(when), ra.value - rb.value});
      }
  }
  return StepProcess(a.partition(), std::move(rules));
}

StepProcess operator*(double s, const StepProcess& a) {
  std::vector<std::vector<Rule<HSMap>>> rules(a.intervals());
  for (std::size_t i = 0; i < a.intervals(); ++i)
    for (const auto& r : a.rules(i)) rules[i].push_back({r.when, s * r.value});
  return StepProcess(a.partition(), std::move(rules));
}

Vector integrate_on_path(const StepProcess& psi, const Matrix& g_increments, const std::vector<int>& jumps) {
  if (g_increments.cols() != static_cast<Eigen::Index>(psi.intervals()) || g_increments.rows() != dim_g(psi))
    throw DimensionError("integrate_on_path: path does not match the integrand");
  const PathView view{g_increments, jumps};
  Vector out = Vector::Zero(dim_h(psi));
  for (std::size_t i = 0; i < psi.intervals(); ++i)
    out += psi.select(i, view).matrix() * g_increments.col(static_cast<Eigen::Index>(i));
  return out;
}

// ---- laws ------------------------------------------------------------------------

EmpiricalLaw::EmpiricalLaw(Matrix samples, std::uint64_t seed)
    : samples_(std::move(samples)), seed_(seed), ky_fan_(cyllevy::ky_fan(samples_)) {
  if (!samples_.allFinite()) throw DomainError("EmpiricalLaw: non-finite sample");
}

EmpiricalLaw integrate_step_pred(const StepProcess& psi, const Driver& driver, std::size_t n_mc,
                                 const Stream& rng) {
  if (dim_g(psi) != driver.dim_g()) throw DimensionError("integrate: integrand does not act on G");
  if (n_mc < kMinReplicas) throw DomainError("integrate: need at least 100 replicas");
  Matrix samples(dim_h(psi), static_cast<Eigen::Index>(n_mc));
  parallel_blocks(n_mc, kBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<int> jumps;
    for (std::size_t r = begin; r < end; ++r) {
      Stream s = rng.split(r);
      const Matrix g = sample_g_path(driver, psi.partition(), s, &jumps);
      samples.col(static_cast<Eigen::Index>(r)) = integrate_on_path(psi, g, jumps);
    }
  });
  return EmpiricalLaw(std::move(samples), rng.key());
}

EmpiricalLaw integrate_step_det(const StepFunction& psi, const Driver& driver, std::size_t n_mc,
                                const Stream& rng) {
  return integrate_step_pred(to_process(psi), driver, n_mc, rng);
}

// ---- Gamma search ------------------------------------------------------------------

namespace {

using RuleSet = std::vector<Rule<Contraction>>;
using GammaRules = std::vector<RuleSet>;  // per piece

// One replica aggregated onto the Gamma pieces.
struct PieceData {
  Matrix g;  // d_G x J
  std::vector<int> jumps;
  Matrix y;  // d_H x J, integral of Psi over each piece
};

Partition gamma_partition(const Partition& fine, const GammaSearchOptions& options) {
  if (options.pieces) {
    if (!fine.refines(*options.pieces)) throw DomainError("Gamma pieces are not refined by the integrand");
    return *options.pieces;
  }
  if (options.max_pieces < 1) throw DomainError("Gamma search: max_pieces must be positive");
  if (fine.intervals() <= options.max_pieces) return fine;
  const std::size_t stride = (fine.intervals() + options.max_pieces - 1) / options.max_pieces;
  std::vector<double> pts;
  for (std::size_t i = 0; i < fine.intervals(); i += stride) pts.push_back(fine.points()[i]);
  pts.push_back(fine.end());
  return Partition(std::move(pts));
}

std::vector<PieceData> build_pieces(const StepProcess& psi, const Driver& driver, const Partition& pieces,
                                    std::size_t n, const Stream& rng) {
  if (dim_g(psi) != driver.dim_g()) throw DimensionError("Gamma search: integrand does not act on G");
  if (n < kMinReplicas) throw DomainError("Gamma search: need at least 100 replicas");
  const Partition& fine = psi.partition();
  std::vector<std::size_t> piece_of(fine.intervals());
  for (std::size_t i = 0; i < fine.intervals(); ++i)
    piece_of[i] = pieces.locate(0.5 * (fine.points()[i] + fine.points()[i + 1]));
  const auto pieces_n = static_cast<Eigen::Index>(pieces.intervals());
  std::vector<PieceData> out(n);
  parallel_blocks(n, kBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<int> jumps;
    for (std::size_t r = begin; r < end; ++r) {
      Stream s = rng.split(r);
      const Matrix g = sample_g_path(driver, fine, s, &jumps);
      const PathView view{g, jumps};
      PieceData& d = out[r];
      d.g = Matrix::Zero(g.rows(), pieces_n);
      d.y = Matrix::Zero(dim_h(psi), pieces_n);
      d.jumps.assign(pieces.intervals(), 0);
      for (std::size_t i = 0; i < fine.intervals(); ++i) {
        const auto j = static_cast<Eigen::Index>(piece_of[i]);
        const auto col = g.col(static_cast<Eigen::Index>(i));
        d.g.col(j) += col;
        d.jumps[piece_of[i]] += jumps[i];
        d.y.col(j) += psi.select(i, view).matrix() * col;
      }
    }
  });
  return out;
}

// Contribution Gamma_j(history) y_j of piece j for every replica.
Matrix piece_contributions(const RuleSet& rules, std::size_t j, const std::vector<PieceData>& data, int dim) {
  Matrix out(dim, static_cast<Eigen::Index>(data.size()));
  parallel_blocks(data.size(), kBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const PathView view{data[r].g, data[r].jumps};
      out.col(static_cast<Eigen::Index>(r)) =
          rules[select_rule(rules, j, view)].value.matrix() * data[r].y.col(static_cast<Eigen::Index>(j));
    }
  });
  return out;
}

ScalarEstimate truncated_norm_mean(const Matrix& sums) {
  std::vector<double> v(static_cast<std::size_t>(sums.cols()));
  for (Eigen::Index r = 0; r < sums.cols(); ++r) v[static_cast<std::size_t>(r)] = std::min(sums.col(r).norm(), 1.0);
  return estimate_of(v);
}

// Per-replica values of min(max_{grid} |partial sum|, 1) or of the terminal
// truncated norm when `grid_after` is empty.
std::vector<double> replica_values(const GammaRules& gamma, const std::vector<PieceData>& data,
                                   const std::vector<bool>& grid_after, bool truncate) {
  std::vector<double> out(data.size());
  const std::size_t pieces = gamma.size();
  parallel_blocks(data.size(), kBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      const PathView view{data[r].g, data[r].jumps};
      Vector sum = Vector::Zero(data[r].y.rows());
      double sup = 0.0;
      for (std::size_t j = 0; j < pieces; ++j) {
        sum += gamma[j][select_rule(gamma[j], j, view)].value.matrix() * data[r].y.col(static_cast<Eigen::Index>(j));
        if (!grid_after.empty() && grid_after[j]) sup = std::max(sup, sum.norm());
      }
      const double v = grid_after.empty() ? sum.norm() : sup;
      out[r] = truncate ? std::min(v, 1.0) : v;
    }
  });
  return out;
}

RuleSet fixed(Contraction o) { return {Rule<Contraction>{{}, std::move(o)}}; }

RuleSet sign_adapted(std::size_t j, int coord, Contraction if_positive, Contraction otherwise) {
  const Predicate p = Predicate::coord_sign(static_cast<int>(j) - 1, coord);
  return {Rule<Contraction>{{p}, std::move(if_positive)}, Rule<Contraction>{{!p}, std::move(otherwise)}};
}

GammaRules identity_rules(std::size_t pieces, int dim) {
  return GammaRules(pieces, fixed(Contraction::identity(dim)));
}

GammaRules random_rules(std::size_t pieces, int dim_h, int dim_g, Stream& stream) {
  GammaRules out;
  out.reserve(pieces);
  for (std::size_t j = 0; j < pieces; ++j) {
    const auto mode = static_cast<ContractionMode>(stream() % 3);
    if (j > 0 && stream.uniform() < 0.5) {
      const int coord = static_cast<int>(stream() % static_cast<std::uint64_t>(dim_g));
      Contraction a = sample_contraction(stream, mode, dim_h);
      Contraction b = sample_contraction(stream, mode, dim_h);
      out.push_back(sign_adapted(j, coord, std::move(a), std::move(b)));
    } else {
      out.push_back(fixed(sample_contraction(stream, mode, dim_h)));
    }
  }
  return out;
}

struct SearchOutcome {
  GammaRules best;
  double best_value = -1.0;
  std::vector<GammaTrial> trace;
  std::vector<GammaRules> family;
};

SearchOutcome search_gamma(const std::vector<PieceData>& data, std::size_t pieces, int dim_h, int dim_g,
                           int budget, Stream stream) {
  if (budget < 1) throw DomainError("Gamma search: budget must be at least 1");
  SearchOutcome out;
  int used = 0;
  auto consider = [&](GammaRules rules, std::string label) {
    ++used;
    const ScalarEstimate e = estimate_of(replica_values(rules, data, {}, true));
    out.trace.push_back({std::move(label), e.value, e.std_error});
    if (e.value > out.best_value) {
      out.best_value = e.value;
      out.best = rules;
    }
    out.family.push_back(std::move(rules));
  };

  consider(identity_rules(pieces, dim_h), "identity");
  const int random_draws = (budget - 1) / 2;
  for (int k = 0; k < random_draws && used < budget; ++k)
    consider(random_rules(pieces, dim_h, dim_g, stream), "random-" + std::to_string(k));

  // Greedy piecewise ascent from the best candidate so far.
  GammaRules current = out.best;
  std::vector<Matrix> contrib(pieces);
  Matrix total = Matrix::Zero(dim_h, static_cast<Eigen::Index>(data.size()));
  for (std::size_t j = 0; j < pieces; ++j) {
    contrib[j] = piece_contributions(current[j], j, data, dim_h);
    total += contrib[j];
  }
  double value = out.best_value;
  const Contraction id = Contraction::identity(dim_h);
  const Contraction minus_id(-Matrix::Identity(dim_h, dim_h));
  bool improved = true;
  while (used < budget && improved) {
    improved = false;
    for (std::size_t j = 0; j < pieces && used < budget; ++j) {
      const Matrix rest = total - contrib[j];
      Vector mean_y = Vector::Zero(dim_h);
      for (const auto& d : data) mean_y += d.y.col(static_cast<Eigen::Index>(j));
      mean_y /= static_cast<double>(data.size());
      const Vector target = rest.rowwise().mean();

      std::vector<std::pair<RuleSet, std::string>> candidates{{fixed(id), "+I"}, {fixed(minus_id), "-I"}};
      if (mean_y.norm() > 0.0 && target.norm() > 0.0) {
        const Contraction r = rotation_align(HVec(mean_y, Space::kH), HVec(target / target.norm(), Space::kH));
        candidates.emplace_back(fixed(r), "+R");
        candidates.emplace_back(fixed(Contraction(-r.matrix())), "-R");
      }
      if (j > 0) {
        candidates.emplace_back(sign_adapted(j, 0, id, minus_id), "sign+");
        candidates.emplace_back(sign_adapted(j, 0, minus_id, id), "sign-");
      }
      for (auto& [rules, label] : candidates) {
        if (used >= budget) break;
        ++used;
        const Matrix c = piece_contributions(rules, j, data, dim_h);
        const ScalarEstimate e = truncated_norm_mean(rest + c);
        out.trace.push_back({"greedy-" + std::to_string(j) + label, e.value, e.std_error});
        GammaRules full = current;
        full[j] = rules;
        if (e.value > value) {
          value = e.value;
          current = full;
          contrib[j] = c;
          total = rest + c;
          improved = true;
          if (value > out.best_value) {
            out.best_value = value;
            out.best = current;
          }
        }
        out.family.push_back(std::move(full));
      }
    }
  }
  return out;
}

}  // namespace

SupGammaResult sup_gamma_ky_fan(const StepProcess& psi, const Driver& driver, const GammaSearchOptions& options,
                                const Stream& rng) {
  const Partition pieces = gamma_partition(psi.partition(), options);
  const int dh = dim_h(psi);
  const auto search_data = build_pieces(psi, driver, pieces, options.n_mc, rng.split(0));
  SearchOutcome found = search_gamma(search_data, pieces.intervals(), dh, driver.dim_g(), options.budget, rng.split(2));
  const auto holdout = build_pieces(psi, driver, pieces, options.n_mc, rng.split(1));
  SupGammaResult out{estimate_of(replica_values(found.best, holdout, {}, true)),
                     estimate_of(replica_values(identity_rules(pieces.intervals(), dh), holdout, {}, true)),
                     found.best_value, std::move(found.trace), ContractionStepProcess(pieces, found.best)};
  return out;
}

SupGammaResult sup_gamma_ky_fan(const StepFunction& psi, const Driver& driver, const GammaSearchOptions& options,
                                const Stream& rng) {
  return sup_gamma_ky_fan(to_process(psi), driver, options, rng);
}

std::vector<ScalarEstimate> emery_sup_diagnostic(const std::vector<StepProcess>& sequence, const Driver& driver,
                                                 const Partition& grid, const GammaSearchOptions& options,
                                                 const Stream& rng) {
  std::vector<ScalarEstimate> out;
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    const StepProcess& psi = sequence[k];
    const Partition pieces = gamma_partition(psi.partition(), options);
    if (!pieces.refines(grid)) throw DomainError("emery_sup_diagnostic: Gamma pieces do not refine the grid");
    std::vector<bool> grid_after(pieces.intervals(), false);
    for (std::size_t j = 0; j < pieces.intervals(); ++j) {
      const double t = pieces.points()[j + 1];
      grid_after[j] = std::binary_search(grid.points().begin(), grid.points().end(), t);
    }
    const Stream element = rng.split(k);
    const auto data = build_pieces(psi, driver, pieces, options.n_mc, element.split(0));
    const SearchOutcome found =
        search_gamma(data, pieces.intervals(), dim_h(psi), driver.dim_g(), options.budget, element.split(2));
    ScalarEstimate best{-1.0, 0.0};
    for (const auto& gamma : found.family) {
      const ScalarEstimate e = estimate_of(replica_values(gamma, data, grid_after, true));
      if (e.value > best.value) best = e;
    }
    out.push_back(best);
  }
  return out;
}

std::vector<double> gamma_family_quantiles(const StepProcess& psi, const Driver& driver, std::size_t members,
                                           double q, const GammaSearchOptions& options, const Stream& rng) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("gamma_family_quantiles: q must lie in (0, 1)");
  const Partition pieces = gamma_partition(psi.partition(), options);
  const int dh = dim_h(psi);
  const auto data = build_pieces(psi, driver, pieces, options.n_mc, rng.split(0));
  const Stream family = rng.split(1);
  std::vector<double> out;
  out.reserve(members);
  for (std::size_t k = 0; k < members; ++k) {
    Stream s = family.split(k);
    const GammaRules gamma =
        k == 0 ? identity_rules(pieces.intervals(), dh) : random_rules(pieces.intervals(), dh, driver.dim_g(), s);
    out.push_back(quantile(replica_values(gamma, data, {}, false), q));
  }
  return out;
}

ScalarEstimate randomized_modular(const StepProcess& psi, const Driver& driver, std::size_t paths, int l_budget,
                                  const Stream& rng) {
  if (dim_g(psi) != driver.dim_g()) throw DimensionError("randomized_modular: integrand does not act on G");
  // The modular is additive over intervals, so each rule's contribution is
  // computed once.
  std::vector<std::vector<double>> contribution(psi.intervals());
  const Stream l_stream = rng.split(0);
  for (std::size_t i = 0; i < psi.intervals(); ++i) {
    const double dt = psi.partition().length(i);
    for (std::size_t k = 0; k < psi.rules(i).size(); ++k) {
      const HSMap& f = psi.rules(i)[k].value;
      double c = 0.0;
      if (!f.is_zero()) {
        const GenuineTriplet t = driver.triplet(f);
        c = dt * (k_of(t) + l_of(t, l_budget, l_stream.split(i).split(k)).lower + std::min(f.hs_norm() * f.hs_norm(), 1.0));
      }
      contribution[i].push_back(c);
    }
  }
  const Stream path_stream = rng.split(1);
  std::vector<double> values(paths);
  parallel_blocks(paths, kBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<int> jumps;
    for (std::size_t r = begin; r < end; ++r) {
      Stream s = path_stream.split(r);
      const Matrix g = sample_g_path(driver, psi.partition(), s, &jumps);
      const PathView view{g, jumps};
      double m = 0.0;
      for (std::size_t i = 0; i < psi.intervals(); ++i) m += contribution[i][psi.select_index(i, view)];
      values[r] = std::min(m, 1.0);
    }
  });
  return estimate_of(values);
}

// ---- general integrands ----------------------------------------------------------

GeneralIntegral integrate_general(const Sampler& sampler, double horizon, const Driver& driver,
                                  const GeneralOptions& options, const Stream& rng) {
  if (!(options.tolerance > 0.0)) throw DomainError("integrate_general: tolerance must be positive");
  if (options.max_level < 0 || options.max_level > 16) throw DomainError("integrate_general: max_level in [0, 16]");
  GeneralIntegral out;
  StepFunction current = truncated_step(sampler, horizon, 0, 1.0);
  for (int j = 0; j < options.max_level; ++j) {
    StepFunction next = truncated_step(sampler, horizon, j + 1, std::ldexp(1.0, j + 1));
    const Stream level = rng.split(static_cast<std::uint64_t>(j));
    out.modular_increments.push_back(quasi_metric(driver, next, current, options.l_budget, level.split(0)));
    const SupGammaResult c = sup_gamma_ky_fan(next - current, driver, options.gamma, level.split(1));
    out.cauchy.push_back(c.value);
    current = std::move(next);
    out.level = j + 1;
    if (c.value.value < options.tolerance) {
      out.integrable = true;
      break;
    }
  }
  out.law = integrate_step_det(current, driver, options.law_samples, rng.split(1000));
  return out;
}

// ---- tangent sequences ---------------------------------------------------------------

TangentPair tangent_pair(const StepProcess& psi, const Driver& driver, std::size_t n_mc, const Stream& rng,
                         const Stream& rng_prime) {
  (void)decoupled_driver(driver, rng, rng_prime);
  if (dim_g(psi) != driver.dim_g()) throw DimensionError("tangent_pair: integrand does not act on G");
  if (n_mc < kMinReplicas) throw DomainError("tangent_pair: need at least 100 replicas");
  const std::size_t terms = psi.intervals();
  const int dh = dim_h(psi);
  const auto n = static_cast<Eigen::Index>(n_mc);
  TangentPair out{std::vector<Matrix>(terms, Matrix(dh, n)), std::vector<Matrix>(terms, Matrix(dh, n)),
                  Matrix::Zero(dh, n), Matrix::Zero(dh, n), std::vector<std::vector<int>>(terms, std::vector<int>(n_mc))};
  parallel_blocks(n_mc, kBlock, [&](std::size_t, std::size_t begin, std::size_t end) {
    std::vector<int> jumps;
    for (std::size_t r = begin; r < end; ++r) {
      const auto col = static_cast<Eigen::Index>(r);
      Stream s = rng.split(r);
      Stream s_prime = rng_prime.split(r);
      const Matrix g = sample_g_path(driver, psi.partition(), s, &jumps);
      const PathView view{g, jumps};
      for (std::size_t i = 0; i < terms; ++i) {
        const Matrix& theta = psi.select(i, view).matrix();
        const Vector g_prime = driver.sample_g_increment(psi.partition().length(i), s_prime);
        out.x_terms[i].col(col) = theta * g.col(static_cast<Eigen::Index>(i));
        out.y_terms[i].col(col) = theta * g_prime;
        out.x_sum.col(col) += out.x_terms[i].col(col);
        out.y_sum.col(col) += out.y_terms[i].col(col);
        out.jumps[i][r] = jumps[i];
      }
    }
  });
  return out;
}

namespace {

std::vector<double> truncated_norms(const Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.cols(); ++r) out[static_cast<std::size_t>(r)] = std::min(m.col(r).norm(), 1.0);
  return out;
}

// Delta-method estimate of mean(a) / mean(b) for paired samples.
ScalarEstimate ratio_estimate(const std::vector<double>& a, const std::vector<double>& b) {
  const auto n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  const double ratio = ma / mb;
  double var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double z = (a[i] - ma) - ratio * (b[i] - mb);
    var += z * z;
  }
  var /= (n - 1.0);
  return {ratio, std::sqrt(var / n) / mb};
}

}  // namespace

DecouplingRatio decoupling_ratio(const TangentPair& pair, int sign_budget, const Stream& rng) {
  if (pair.terms() == 0 || pair.replicas() < 2) throw DomainError("decoupling_ratio: degenerate pair");
  if (sign_budget < 1) throw DomainError("decoupling_ratio: sign budget must be positive");
  const std::vector<double> kx = truncated_norms(pair.x_sum);
  const std::vector<double> ky = truncated_norms(pair.y_sum);
  const std::size_t terms = pair.terms();

  std::vector<std::vector<int>> patterns;
  const bool enumerate = terms < 31 && (std::size_t{1} << terms) <= static_cast<std::size_t>(sign_budget);
  if (enumerate) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << terms); ++mask) {
      std::vector<int> eps(terms);
      for (std::size_t n = 0; n < terms; ++n) eps[n] = ((mask >> n) & 1U) != 0U ? -1 : 1;
      patterns.push_back(std::move(eps));
    }
  } else {
    Stream s = rng;
    patterns.emplace_back(terms, 1);
    while (patterns.size() < static_cast<std::size_t>(sign_budget)) {
      std::vector<int> eps(terms);
      for (auto& e : eps) e = s.uniform() < 0.5 ? -1 : 1;
      patterns.push_back(std::move(eps));
    }
  }
  std::vector<double> best_signed;
  double best_mean = -1.0;
  for (const auto& eps : patterns) {
    Matrix sum = Matrix::Zero(pair.x_sum.rows(), pair.x_sum.cols());
    for (std::size_t n = 0; n < terms; ++n) sum += static_cast<double>(eps[n]) * pair.x_terms[n];
    std::vector<double> v = truncated_norms(sum);
    const double m = estimate_of(v).value;
    if (m > best_mean) {
      best_mean = m;
      best_signed = std::move(v);
    }
  }
  DecouplingRatio out;
  out.sign_patterns = static_cast<int>(patterns.size());
  const ScalarEstimate ey = estimate_of(ky);
  const ScalarEstimate es = estimate_of(best_signed);
  out.reliable = ey.value > 3.0 * ey.std_error && es.value > 3.0 * es.std_error;
  out.forward = ratio_estimate(kx, ky);
  out.backward = ratio_estimate(ky, best_signed);
  return out;
}

}  // namespace cyllevy
