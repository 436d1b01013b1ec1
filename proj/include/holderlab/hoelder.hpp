#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

#include "holderlab/errors.hpp"
#include "holderlab/exponents.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/norms.hpp"
#include "holderlab/parallel.hpp"

// Anisotropic Hoelder quotients and their supremum over cell pairs.  For a
// pair (a, b) the denominator sums |x_a,i - x_b,i|^{beta_i(a,b)} over the
// axes, where beta_i(a,b) is the smaller of the two cells' regularity
// exponents in direction i.  The seminorm is the supremum of the quotient
// over a pair set: every unordered pair when that is affordable, otherwise a
// seeded sample topped up with all axis-neighbor pairs (the near-diagonal
// pairs dominate in practice, so they are never left to chance).

namespace holderlab {

enum class PairScanMode { Exhaustive, Sampled };

struct PairScanPolicy {
  PairScanMode mode = PairScanMode::Sampled;
  std::uint64_t pair_budget = 200000;
  std::uint64_t seed = 0;
  bool include_axis_neighbors = true;
  // a Sampled request still scans everything when the full pair count is
  // at most this
  std::uint64_t exhaustive_threshold = 2000000;
};

struct HoelderResult {
  double seminorm = 0.0;
  double sup = 0.0;   // max |u| over active cells
  double norm = 0.0;  // sup + seminorm
  std::size_t argmax_a = 0, argmax_b = 0;
  std::vector<double> argmax_a_center, argmax_b_center;
  std::uint64_t pairs_evaluated = 0;
  PairScanMode mode_used = PairScanMode::Exhaustive;
  std::uint64_t seed = 0;
};

// |u(a) - u(b)| / sum_i |x_a,i - x_b,i|^{min(beta_i(a), beta_i(b))}.
// A zero displacement contributes 0 to the denominator for positive beta and
// +inf for negative beta (driving the quotient to zero), matching the limits
// of |d|^beta.
inline double hoelder_quotient(const GridFunction& u, const BetaField& beta,
                               std::size_t a, std::size_t b) {
  const Grid& g = *u.grid();
  if (a == b || a >= u.size() || b >= u.size()) throw InvalidPairError(a, b);
  const int nd = g.dim();
  const double* xa = g.cell_center(a).data();
  const double* xb = g.cell_center(b).data();
  double denom = 0.0;
  for (int i = 0; i < nd; ++i) {
    const double d = std::fabs(xa[i] - xb[i]);
    const double bi = std::min(beta.value(a, i), beta.value(b, i));
    denom += std::pow(d, bi);
  }
  return std::fabs(u[a] - u[b]) / denom;
}

namespace detail {

struct BestPair {
  double q = -1.0;
  std::size_t a = 0, b = 0;
  std::uint64_t seen = 0;

  // quotients are >= 0, so the -1 sentinel always loses; ties resolve to the
  // lexicographically smallest pair, making results independent of
  // evaluation order
  void offer(double q_, std::size_t a_, std::size_t b_) {
    ++seen;
    if (q_ > q || (q_ == q && (a_ < a || (a_ == a && b_ < b)))) {
      q = q_;
      a = a_;
      b = b_;
    }
  }

  void merge(const BestPair& o) {
    seen += o.seen;
    if (o.seen > 0 &&
        (o.q > q || (o.q == q && (o.a < a || (o.a == a && o.b < b))))) {
      q = o.q;
      a = o.a;
      b = o.b;
    }
  }
};

// Quotient with the beta minimum inlined (hot path of the scans).
inline double pair_quotient(const GridFunction& u, const BetaField& beta,
                            int nd, std::size_t a, std::size_t b) {
  const Grid& g = *u.grid();
  const double* xa = g.cell_center(a).data();
  const double* xb = g.cell_center(b).data();
  double denom = 0.0;
  for (int i = 0; i < nd; ++i) {
    const double d = std::fabs(xa[i] - xb[i]);
    const double bi = std::min(beta.value(a, i), beta.value(b, i));
    denom += std::pow(d, bi);
  }
  return std::fabs(u[a] - u[b]) / denom;
}

template <class Visit>
void scan_axis_neighbors(const Grid& g, Visit&& visit) {
  const std::size_t n = g.active_count();
  for (std::size_t k = 0; k < n; ++k)
    for (int axis = 0; axis < g.dim(); ++axis)
      if (auto j = g.active_neighbor(k, axis, +1)) visit(k, *j);
}

}  // namespace detail

// Supremum of the pair quotient over the policy's pair set.  Exhaustive mode
// (explicit, or a sampled request whose full pair count fits the threshold)
// visits every unordered pair; sampled mode draws `pair_budget` seeded pairs
// and adds every axis-neighbor pair unless told not to.  Either way the
// result is bit-identical across thread counts.
inline HoelderResult hoelder_seminorm(const GridFunction& u,
                                      const BetaField& beta,
                                      const PairScanPolicy& policy = {}) {
  const Grid& g = *u.grid();
  if (u.grid() != beta.grid())
    throw GridError("hoelder_seminorm: function and exponents live on different grids");
  const std::size_t n = u.size();
  const int nd = g.dim();
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const bool exhaustive = policy.mode == PairScanMode::Exhaustive ||
                          total <= policy.exhaustive_threshold;

  detail::BestPair best;
  if (exhaustive) {
    const std::size_t row_chunk = 64;
    const std::size_t chunks = (n + row_chunk - 1) / row_chunk;
    std::vector<detail::BestPair> partial(chunks);
    parallel_chunks(n, row_chunk,
                    [&](std::size_t c, std::size_t lo, std::size_t hi) {
                      detail::BestPair local;
                      for (std::size_t a = lo; a < hi; ++a)
                        for (std::size_t b = a + 1; b < n; ++b)
                          local.offer(detail::pair_quotient(u, beta, nd, a, b),
                                      a, b);
                      partial[c] = local;
                    });
    for (const auto& loc : partial) best.merge(loc);
  } else {
    const std::uint64_t budget = policy.pair_budget;
    const std::size_t chunks =
        (budget + kDefaultChunk - 1) / kDefaultChunk;
    std::vector<detail::BestPair> partial(chunks);
    parallel_chunks(budget, kDefaultChunk,
                    [&](std::size_t c, std::size_t lo, std::size_t hi) {
                      detail::BestPair local;
                      for (std::size_t t = lo; t < hi; ++t) {
                        const std::uint64_t h =
                            hash_combine(policy.seed, t);
                        std::size_t a =
                            static_cast<std::size_t>((h >> 32) % n);
                        std::size_t b =
                            static_cast<std::size_t>((h & 0xffffffffu) % n);
                        if (a == b) continue;
                        if (a > b) std::swap(a, b);
                        local.offer(detail::pair_quotient(u, beta, nd, a, b),
                                    a, b);
                      }
                      partial[c] = local;
                    });
    for (const auto& loc : partial) best.merge(loc);
    if (policy.include_axis_neighbors) {
      detail::BestPair nb;
      detail::scan_axis_neighbors(g, [&](std::size_t a, std::size_t b) {
        const std::size_t lo = std::min(a, b), hi = std::max(a, b);
        nb.offer(detail::pair_quotient(u, beta, nd, lo, hi), lo, hi);
      });
      best.merge(nb);
    }
  }

  HoelderResult r;
  r.seminorm = best.seen > 0 ? best.q : 0.0;
  r.argmax_a = best.a;
  r.argmax_b = best.b;
  if (best.seen > 0) {
    auto ca = g.cell_center(best.a);
    auto cb = g.cell_center(best.b);
    r.argmax_a_center.assign(ca.begin(), ca.end());
    r.argmax_b_center.assign(cb.begin(), cb.end());
  }
  r.pairs_evaluated = best.seen;
  r.mode_used = exhaustive ? PairScanMode::Exhaustive : PairScanMode::Sampled;
  r.seed = exhaustive ? 0 : policy.seed;
  r.sup = sup_norm(u);
  r.norm = r.sup + r.seminorm;
  return r;
}

// Full norm: sup over cells plus the pair-quotient supremum, by construction
// the exact sum of the two reported parts.
inline HoelderResult hoelder_norm(const GridFunction& u, const BetaField& beta,
                                  const PairScanPolicy& policy = {}) {
  return hoelder_seminorm(u, beta, policy);
}

// One row per visited pair, in scan order, capped at `max_rows` (the scan
// stops there).  Columns: a_index, b_index, quotient.
inline void write_pair_quotients_csv(const GridFunction& u,
                                     const BetaField& beta,
                                     const PairScanPolicy& policy,
                                     std::ostream& os,
                                     std::uint64_t max_rows = 100000) {
  const Grid& g = *u.grid();
  const std::size_t n = u.size();
  const int nd = g.dim();
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const bool exhaustive = policy.mode == PairScanMode::Exhaustive ||
                          total <= policy.exhaustive_threshold;
  os << "a_index,b_index,quotient\n";
  std::uint64_t rows = 0;
  const auto emit = [&](std::size_t a, std::size_t b) {
    if (rows >= max_rows) return false;
    os << a << "," << b << ","
       << format_double(detail::pair_quotient(u, beta, nd, a, b)) << "\n";
    ++rows;
    return true;
  };
  if (exhaustive) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (!emit(a, b)) return;
  } else {
    for (std::uint64_t t = 0; t < policy.pair_budget; ++t) {
      const std::uint64_t h = hash_combine(policy.seed, t);
      std::size_t a = static_cast<std::size_t>((h >> 32) % n);
      std::size_t b = static_cast<std::size_t>((h & 0xffffffffu) % n);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (!emit(a, b)) return;
    }
    if (policy.include_axis_neighbors) {
      bool more = true;
      detail::scan_axis_neighbors(g, [&](std::size_t a, std::size_t b) {
        if (more) more = emit(std::min(a, b), std::max(a, b));
      });
    }
  }
}

}  // namespace holderlab
