#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "holderlab/errors.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/parallel.hpp"

// Direction-dependent variable exponents p_1(x), ..., p_N(x) and the derived
// quantities: pointwise min/max, harmonic mean, critical exponent, the
// per-direction regularity exponents beta_i(x) used by the Hoelder side, and
// the structural hypotheses that make the whole comparison meaningful.

namespace holderlab {

// One exponent field per grid axis.  Values must stay strictly above 1
// everywhere: below that the modular is no longer convex and a norm built
// from it stops being a norm, so this is enforced at construction (the softer
// dimension-related hypothesis is checked separately and can be overridden).
class ExponentVectorField {
 public:
  explicit ExponentVectorField(std::vector<GridFunction> fields)
      : fields_(std::move(fields)) {
    if (fields_.empty())
      throw GridError("exponent vector field needs at least one direction");
    grid_ = fields_.front().grid();
    for (const auto& f : fields_)
      if (f.grid() != grid_)
        throw GridError("exponent fields must share one grid");
    if (static_cast<int>(fields_.size()) != grid_->dim())
      throw GridError("need one exponent field per axis: got " +
                      std::to_string(fields_.size()) + " for dimension " +
                      std::to_string(grid_->dim()));
    std::size_t bad = 0;
    for (const auto& f : fields_)
      for (std::size_t k = 0; k < f.size(); ++k)
        if (!(f[k] > 1.0)) ++bad;
    if (bad > 0) throw HypothesisError(bad);
    const std::size_t n = grid_->active_count();
    pmin_.resize(n);
    pmax_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double lo = fields_[0][k], hi = fields_[0][k];
      for (std::size_t i = 1; i < fields_.size(); ++i) {
        lo = std::min(lo, fields_[i][k]);
        hi = std::max(hi, fields_[i][k]);
      }
      pmin_[k] = lo;
      pmax_[k] = hi;
    }
  }

  // One expression per axis; a single expression is replicated to all axes.
  static ExponentVectorField sample(const GridPtr& grid,
                                    const std::vector<FieldExpr>& exprs) {
    if (exprs.empty())
      throw GridError("exponent vector field needs at least one expression");
    std::vector<GridFunction> fields;
    const int n = grid->dim();
    if (exprs.size() == 1) {
      GridFunction f = GridFunction::sample(grid, exprs.front());
      for (int a = 0; a < n; ++a) fields.push_back(f);
    } else {
      for (const auto& e : exprs) fields.push_back(GridFunction::sample(grid, e));
    }
    return ExponentVectorField(std::move(fields));
  }

  const GridPtr& grid() const { return grid_; }
  int directions() const { return static_cast<int>(fields_.size()); }
  const GridFunction& field(int axis) const {
    return fields_[static_cast<std::size_t>(axis)];
  }
  double value(std::size_t k, int axis) const {
    return fields_[static_cast<std::size_t>(axis)][k];
  }

  // pointwise extremes across directions
  double pointwise_min(std::size_t k) const { return pmin_[k]; }
  double pointwise_max(std::size_t k) const { return pmax_[k]; }
  GridFunction pointwise_min_field() const { return GridFunction(grid_, pmin_); }
  GridFunction pointwise_max_field() const { return GridFunction(grid_, pmax_); }

  double direction_min(int axis) const {
    const auto& f = fields_[static_cast<std::size_t>(axis)];
    double lo = f[0];
    for (std::size_t k = 1; k < f.size(); ++k) lo = std::min(lo, f[k]);
    return lo;
  }
  double direction_max(int axis) const {
    const auto& f = fields_[static_cast<std::size_t>(axis)];
    double hi = f[0];
    for (std::size_t k = 1; k < f.size(); ++k) hi = std::max(hi, f[k]);
    return hi;
  }

 private:
  GridPtr grid_;
  std::vector<GridFunction> fields_;
  std::vector<double> pmin_, pmax_;
};

// Harmonic mean across directions: N / sum_j 1/p_j(x).
inline GridFunction harmonic_mean(const ExponentVectorField& p) {
  const std::size_t n = p.grid()->active_count();
  const int nd = p.directions();
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = pairwise_sum(static_cast<std::size_t>(nd), [&](std::size_t j) {
      return 1.0 / p.value(k, static_cast<int>(j));
    });
    v[k] = static_cast<double>(nd) / s;
  }
  return GridFunction(p.grid(), std::move(v));
}

// The critical exponent N*pbar/(N - pbar) where pbar < N; infinite where
// pbar >= N.  Kept apart from GridFunction, which insists on finite values.
class CriticalExponentField {
 public:
  CriticalExponentField(GridPtr grid, std::vector<double> v)
      : grid_(std::move(grid)), v_(std::move(v)) {}

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t k) const { return v_[k]; }
  bool infinite_at(std::size_t k) const { return std::isinf(v_[k]); }
  std::size_t finite_count() const {
    std::size_t c = 0;
    for (double x : v_)
      if (!std::isinf(x)) ++c;
    return c;
  }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

inline CriticalExponentField critical_exponent(const GridFunction& pbar,
                                               int dimension) {
  const double N = dimension;
  std::vector<double> v(pbar.size());
  for (std::size_t k = 0; k < pbar.size(); ++k) {
    v[k] = pbar[k] < N ? N * pbar[k] / (N - pbar[k])
                       : std::numeric_limits<double>::infinity();
  }
  return CriticalExponentField(pbar.grid(), std::move(v));
}

// --- regularity exponents ------------------------------------------------

struct BetaOptions {
  // The direction-dependent form uses N/p_i(x) in the denominator of beta_i.
  // Setting this replaces it with N/p_1(x) for every direction, reproducing
  // the first-direction variant some derivations quote.
  bool literal_first_direction = false;
};

// Per-direction fields beta_i(x) = S(x) / (S(x) + N/p_i(x)) with
// S(x) = 1 - sum_j 1/p_j(x).  Negative values are legitimate (they flag
// cells where the hypotheses fail); only a non-positive denominator is an
// error, since the formula then stops meaning anything.
class BetaField {
 public:
  BetaField(GridPtr grid, std::vector<std::vector<double>> comps)
      : grid_(std::move(grid)), comps_(std::move(comps)) {}

  const GridPtr& grid() const { return grid_; }
  int directions() const { return static_cast<int>(comps_.size()); }
  double value(std::size_t k, int axis) const {
    return comps_[static_cast<std::size_t>(axis)][k];
  }
  const std::vector<double>& component(int axis) const {
    return comps_[static_cast<std::size_t>(axis)];
  }
  double direction_min(int axis) const {
    const auto& c = comps_[static_cast<std::size_t>(axis)];
    double lo = c[0];
    for (double x : c) lo = std::min(lo, x);
    return lo;
  }
  double direction_max(int axis) const {
    const auto& c = comps_[static_cast<std::size_t>(axis)];
    double hi = c[0];
    for (double x : c) hi = std::max(hi, x);
    return hi;
  }

 private:
  GridPtr grid_;
  std::vector<std::vector<double>> comps_;
};

inline BetaField beta_exponents(const ExponentVectorField& p,
                                const BetaOptions& opt = {}) {
  const std::size_t n = p.grid()->active_count();
  const int nd = p.directions();
  const double N = nd;
  std::vector<std::vector<double>> comps(
      static_cast<std::size_t>(nd), std::vector<double>(n));
  std::vector<double> inv(static_cast<std::size_t>(nd));
  for (int a = 0; a < nd; ++a) {
    std::vector<std::size_t> degenerate;
    for (std::size_t k = 0; k < n; ++k) {
      for (int j = 0; j < nd; ++j)
        inv[static_cast<std::size_t>(j)] = 1.0 / p.value(k, j);
      const double S =
          1.0 - pairwise_sum(static_cast<std::size_t>(nd),
                             [&](std::size_t j) { return inv[j]; });
      const double t =
          N * inv[static_cast<std::size_t>(opt.literal_first_direction ? 0 : a)];
      const double denom = S + t;
      if (!(denom > 0.0)) {
        degenerate.push_back(k);
        continue;
      }
      comps[static_cast<std::size_t>(a)][k] = S / denom;
    }
    if (!degenerate.empty())
      throw DegenerateDenominatorError(a, std::move(degenerate));
  }
  return BetaField(p.grid(), std::move(comps));
}

// Exponents for a pair of cells: the pointwise minimum of the two cells'
// beta vectors, one entry per direction.
inline std::vector<double> beta_pair(const BetaField& beta, std::size_t a,
                                     std::size_t b) {
  const std::size_t n = beta.grid()->active_count();
  if (a == b || a >= n || b >= n) throw InvalidPairError(a, b);
  std::vector<double> out(static_cast<std::size_t>(beta.directions()));
  for (int i = 0; i < beta.directions(); ++i)
    out[static_cast<std::size_t>(i)] =
        std::min(beta.value(a, i), beta.value(b, i));
  return out;
}

// --- log-regularity modulus ----------------------------------------------

struct LogModulusResult {
  double value = 0.0;
  bool no_valid_pairs = false;  // no pair with 0 < |x-y| < 1/2 was seen
  std::uint64_t pairs_evaluated = 0;
  bool exhaustive = true;
};

// sup |p(x)-p(y)| * log(1/|x-y|) over cell-center pairs with 0 < |x-y| < 1/2.
// Exhaustive when the pair count is at most 2e6; otherwise a seeded sample of
// `pair_budget` draws plus every axis-neighbor pair (the short distances are
// where the modulus bites).  The scan result is bit-reproducible: partial
// maxima merge through a value-then-index comparator.
inline LogModulusResult log_modulus(const GridFunction& p,
                                    std::uint64_t pair_budget = 200000,
                                    std::uint64_t seed = 0) {
  const Grid& g = *p.grid();
  const std::size_t n = p.size();
  const int nd = g.dim();
  const std::uint64_t total =
      static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const bool exhaustive = total <= 2000000ull;

  struct Best {
    double q = -1.0;
    std::size_t a = 0, b = 0;
    std::uint64_t seen = 0;
  };
  const auto eval_pair = [&](std::size_t a, std::size_t b, Best& best) {
    const double* xa = g.cell_center(a).data();
    const double* xb = g.cell_center(b).data();
    double d2 = 0.0;
    for (int i = 0; i < nd; ++i) {
      const double d = xa[i] - xb[i];
      d2 += d * d;
    }
    const double dist = std::sqrt(d2);
    if (!(dist > 0.0 && dist < 0.5)) return;
    const double q = std::fabs(p[a] - p[b]) * (-std::log(dist));
    ++best.seen;
    // q >= 0 always, so the -1 sentinel loses to the first real pair; ties
    // resolve to the lexicographically smallest pair, making the scan result
    // independent of evaluation order.
    if (q > best.q ||
        (q == best.q && (a < best.a || (a == best.a && b < best.b)))) {
      best.q = q;
      best.a = a;
      best.b = b;
    }
  };

  Best best;
  if (exhaustive) {
    const std::size_t chunks = (n + 63) / 64;
    std::vector<Best> partial(chunks);
    parallel_chunks(n, 64, [&](std::size_t c, std::size_t lo, std::size_t hi) {
      Best local;
      for (std::size_t a = lo; a < hi; ++a)
        for (std::size_t b = a + 1; b < n; ++b) eval_pair(a, b, local);
      partial[c] = local;
    });
    for (const auto& loc : partial) {
      best.seen += loc.seen;
      if (loc.seen > 0 &&
          (loc.q > best.q ||
           (loc.q == best.q &&
            (loc.a < best.a || (loc.a == best.a && loc.b < best.b))))) {
        best.q = loc.q;
        best.a = loc.a;
        best.b = loc.b;
      }
    }
  } else {
    // seeded draws
    const std::size_t chunks = (pair_budget + kDefaultChunk - 1) / kDefaultChunk;
    std::vector<Best> partial(chunks);
    parallel_chunks(pair_budget, kDefaultChunk,
                    [&](std::size_t c, std::size_t lo, std::size_t hi) {
                      Best local;
                      for (std::size_t t = lo; t < hi; ++t) {
                        const std::uint64_t h = hash_combine(seed, t);
                        std::size_t a = static_cast<std::size_t>((h >> 32) % n);
                        std::size_t b = static_cast<std::size_t>((h & 0xffffffffu) % n);
                        if (a == b) continue;
                        if (a > b) std::swap(a, b);
                        eval_pair(a, b, local);
                      }
                      partial[c] = local;
                    });
    // plus all axis-neighbor pairs
    Best nb_best;
    for (std::size_t k = 0; k < n; ++k)
      for (int axis = 0; axis < nd; ++axis)
        if (auto j = g.active_neighbor(k, axis, +1)) eval_pair(k, *j, nb_best);
    partial.push_back(nb_best);
    for (const auto& loc : partial) {
      best.seen += loc.seen;
      if (loc.seen > 0 &&
          (loc.q > best.q ||
           (loc.q == best.q &&
            (loc.a < best.a || (loc.a == best.a && loc.b < best.b))))) {
        best.q = loc.q;
        best.a = loc.a;
        best.b = loc.b;
      }
    }
  }

  LogModulusResult r;
  r.pairs_evaluated = best.seen;
  r.exhaustive = exhaustive;
  if (best.seen == 0) {
    r.value = 0.0;
    r.no_valid_pairs = true;
  } else {
    r.value = best.q;
  }
  return r;
}

// --- hypotheses -----------------------------------------------------------

struct HypothesisReport {
  int dimension = 0;
  std::size_t total_cells = 0;
  std::size_t violating_cells = 0;  // some p_i <= 1 or pointwise min <= N
  std::vector<double> p_min, p_max;  // per direction
  double pointwise_min_inf = 0.0;    // inf over cells of min_i p_i(x)
  bool ok() const { return violating_cells == 0; }
};

// Checks 1 < p_i(x) for every direction and min_i p_i(x) > N at every active
// cell.  Construction already guarantees the first clause; it is re-checked
// here so the report stands on its own.
inline HypothesisReport validate_hypotheses(const ExponentVectorField& p) {
  HypothesisReport rep;
  const std::size_t n = p.grid()->active_count();
  const int nd = p.directions();
  rep.dimension = nd;
  rep.total_cells = n;
  rep.p_min.resize(static_cast<std::size_t>(nd));
  rep.p_max.resize(static_cast<std::size_t>(nd));
  for (int a = 0; a < nd; ++a) {
    rep.p_min[static_cast<std::size_t>(a)] = p.direction_min(a);
    rep.p_max[static_cast<std::size_t>(a)] = p.direction_max(a);
  }
  const double N = nd;
  double pm_inf = p.pointwise_min(0);
  for (std::size_t k = 0; k < n; ++k) {
    const double pm = p.pointwise_min(k);
    pm_inf = std::min(pm_inf, pm);
    if (!(pm > 1.0) || !(pm > N)) ++rep.violating_cells;
  }
  rep.pointwise_min_inf = pm_inf;
  return rep;
}

// CSV dump of the regularity exponents: multi-index, center, one beta column
// per direction.
inline void write_beta_csv(const BetaField& beta, std::ostream& os) {
  const Grid& g = *beta.grid();
  const int n = g.dim();
  for (int a = 0; a < n; ++a) os << "i" << (a + 1) << ",";
  for (int a = 0; a < n; ++a) os << "x" << (a + 1) << ",";
  for (int a = 0; a < beta.directions(); ++a) {
    os << "beta_" << (a + 1);
    os << (a + 1 == beta.directions() ? "\n" : ",");
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::vector<double> pt(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < g.active_count(); ++k) {
    g.multi_index(k, idx.data());
    g.cell_center(k, pt.data());
    for (int a = 0; a < n; ++a) os << idx[static_cast<std::size_t>(a)] << ",";
    for (int a = 0; a < n; ++a)
      os << format_double(pt[static_cast<std::size_t>(a)]) << ",";
    for (int a = 0; a < beta.directions(); ++a) {
      os << format_double(beta.value(k, a));
      os << (a + 1 == beta.directions() ? "\n" : ",");
    }
  }
}

}  // namespace holderlab
