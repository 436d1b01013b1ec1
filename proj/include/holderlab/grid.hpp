#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "holderlab/errors.hpp"
#include "holderlab/expr.hpp"
#include "holderlab/parallel.hpp"

// Cell-centered discretization of an axis-aligned box, optionally masked by a
// membership predicate evaluated at cell centers.  Active cells are stored in
// lexicographic order of the multi-index (first axis most significant), and
// every quantity downstream (norms, pair scans, reports) indexes cells by
// their position in that order.

namespace holderlab {

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
};

class Grid {
 public:
  // Builds the lattice, evaluates the predicate (when given) at every cell
  // center, and records the active set.  Throws EmptyDomainError when fewer
  // than two cells are active: nothing downstream is meaningful then.
  static std::shared_ptr<const Grid> build(
      std::vector<AxisRange> box, std::vector<int> resolution,
      const DomainPredicate* predicate = nullptr) {
    auto g = std::shared_ptr<Grid>(new Grid());
    g->init(std::move(box), std::move(resolution), predicate);
    return g;
  }

  int dim() const { return static_cast<int>(res_.size()); }
  int resolution(int axis) const { return res_[static_cast<std::size_t>(axis)]; }
  const std::vector<int>& resolutions() const { return res_; }
  double spacing(int axis) const { return h_[static_cast<std::size_t>(axis)]; }
  AxisRange box(int axis) const { return box_[static_cast<std::size_t>(axis)]; }

  std::size_t active_count() const { return active_full_.size(); }
  std::size_t total_count() const { return total_; }
  // volume of one cell: the midpoint quadrature weight shared by all cells
  double cell_volume() const { return cell_volume_; }
  // midpoint estimate of the measure of the active region
  double measure() const {
    return cell_volume_ * static_cast<double>(active_full_.size());
  }

  // multi-index of the k-th active cell, one component per axis
  void multi_index(std::size_t k, int* out) const {
    std::int64_t full = active_full_[k];
    for (int a = 0; a < dim(); ++a) {
      out[a] = static_cast<int>((full / stride_[static_cast<std::size_t>(a)]) %
                                res_[static_cast<std::size_t>(a)]);
    }
  }

  // center coordinates of the k-th active cell
  void cell_center(std::size_t k, double* out) const {
    const double* c = coords_.data() + k * static_cast<std::size_t>(dim());
    for (int a = 0; a < dim(); ++a) out[a] = c[a];
  }
  std::span<const double> cell_center(std::size_t k) const {
    return {coords_.data() + k * static_cast<std::size_t>(dim()),
            static_cast<std::size_t>(dim())};
  }

  // Active position of the cell `step` lattice steps away from active cell k
  // along `axis`, or nullopt when that cell is outside the box or masked off.
  std::optional<std::size_t> active_neighbor(std::size_t k, int axis,
                                             int step) const {
    const std::int64_t full = active_full_[k];
    const std::int64_t stride = stride_[static_cast<std::size_t>(axis)];
    const std::int64_t i =
        (full / stride) % res_[static_cast<std::size_t>(axis)];
    const std::int64_t j = i + step;
    if (j < 0 || j >= res_[static_cast<std::size_t>(axis)]) return std::nullopt;
    const std::int32_t pos =
        pos_[static_cast<std::size_t>(full + static_cast<std::int64_t>(step) * stride)];
    if (pos < 0) return std::nullopt;
    return static_cast<std::size_t>(pos);
  }

 private:
  Grid() = default;

  void init(std::vector<AxisRange> box, std::vector<int> resolution,
            const DomainPredicate* predicate) {
    if (box.empty() || box.size() != resolution.size())
      throw GridError("box and resolution must agree on a positive dimension");
    if (box.size() > 16) throw GridError("dimension larger than 16");
    box_ = std::move(box);
    res_ = std::move(resolution);
    const int n = dim();
    h_.resize(static_cast<std::size_t>(n));
    stride_.resize(static_cast<std::size_t>(n));
    cell_volume_ = 1.0;
    std::int64_t total = 1;
    for (int a = 0; a < n; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      if (!(std::isfinite(box_[ua].lo) && std::isfinite(box_[ua].hi) &&
            box_[ua].lo < box_[ua].hi))
        throw GridError("axis " + std::to_string(a + 1) +
                        " range must be finite with lo < hi");
      if (res_[ua] < 2)
        throw GridError("axis " + std::to_string(a + 1) +
                        " needs at least 2 cells");
      h_[ua] = (box_[ua].hi - box_[ua].lo) / res_[ua];
      cell_volume_ *= h_[ua];
      total *= res_[ua];
      if (total > (std::int64_t{1} << 24))
        throw GridError("grid exceeds the cell limit of 2^24");
    }
    for (int a = n - 1; a >= 0; --a) {
      const auto ua = static_cast<std::size_t>(a);
      stride_[ua] = (a == n - 1) ? 1 : stride_[ua + 1] * res_[ua + 1];
    }
    total_ = static_cast<std::size_t>(total);

    pos_.assign(total_, -1);
    std::vector<double> pt(static_cast<std::size_t>(n));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::int64_t full = 0; full < total; ++full) {
      for (int a = 0; a < n; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        pt[ua] = box_[ua].lo + (idx[ua] + 0.5) * h_[ua];
      }
      bool active = true;
      if (predicate) active = predicate->eval(pt);
      if (active) {
        pos_[static_cast<std::size_t>(full)] =
            static_cast<std::int32_t>(active_full_.size());
        active_full_.push_back(full);
        coords_.insert(coords_.end(), pt.begin(), pt.end());
      }
      // advance the lexicographic multi-index, last axis fastest
      for (int a = n - 1; a >= 0; --a) {
        const auto ua = static_cast<std::size_t>(a);
        if (++idx[ua] < res_[ua]) break;
        idx[ua] = 0;
      }
    }
    if (active_full_.size() < 2)
      throw EmptyDomainError("fewer than two active cells (" +
                             std::to_string(active_full_.size()) + ")");
  }

  std::vector<AxisRange> box_;
  std::vector<int> res_;
  std::vector<double> h_;
  std::vector<std::int64_t> stride_;
  std::size_t total_ = 0;
  double cell_volume_ = 1.0;
  std::vector<std::int64_t> active_full_;  // full lattice index per active cell
  std::vector<std::int32_t> pos_;          // full index -> active position or -1
  std::vector<double> coords_;             // active cell centers, dim() per cell
};

using GridPtr = std::shared_ptr<const Grid>;

// A scalar field known at the active cells of a grid.  Values are finite by
// construction; anything non-finite is rejected with the offending cell.
class GridFunction {
 public:
  GridFunction(GridPtr grid, std::vector<double> values)
      : grid_(std::move(grid)), v_(std::move(values)) {
    if (v_.size() != grid_->active_count())
      throw GridError("value count " + std::to_string(v_.size()) +
                      " does not match active cell count " +
                      std::to_string(grid_->active_count()));
    for (std::size_t k = 0; k < v_.size(); ++k)
      if (!std::isfinite(v_[k])) throw NonFiniteError(k, "grid function value");
  }

  // Evaluates the expression at every active cell center.  Evaluation errors
  // carry the offending cell index; the lowest-indexed failing chunk wins, so
  // the reported cell does not depend on scheduling.
  static GridFunction sample(const GridPtr& grid, const FieldExpr& f) {
    std::vector<double> v(grid->active_count());
    parallel_chunks_capture(
        v.size(), kDefaultChunk,
        [&](std::size_t, std::size_t lo, std::size_t hi) {
          for (std::size_t k = lo; k < hi; ++k) {
            try {
              v[k] = f.eval(grid->cell_center(k));
            } catch (const EvalError& e) {
              throw EvalError(e.subexpr(), e.point(),
                              "at active cell " + std::to_string(k) + ": " +
                                  e.reason());
            }
          }
        });
    return GridFunction(grid, std::move(v));
  }

  static GridFunction constant(const GridPtr& grid, double c) {
    return GridFunction(grid, std::vector<double>(grid->active_count(), c));
  }

  const GridPtr& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t k) const { return v_[k]; }
  const std::vector<double>& values() const { return v_; }

 private:
  GridPtr grid_;
  std::vector<double> v_;
};

inline GridFunction sample(const GridPtr& grid, const FieldExpr& f) {
  return GridFunction::sample(grid, f);
}

inline GridFunction constant(const GridPtr& grid, double c) {
  return GridFunction::constant(grid, c);
}

// Finite-difference approximation of the partial derivative along `axis`.
// Central differences where both neighbors are active; a second-order
// one-sided stencil at mask boundaries when two same-side neighbors exist,
// falling back to the two-point difference otherwise.  An active cell with no
// active neighbor on either side cannot be differenced at all.
inline GridFunction partial_derivative(const GridFunction& u, int axis) {
  const Grid& g = *u.grid();
  if (axis < 0 || axis >= g.dim())
    throw GridError("axis " + std::to_string(axis + 1) + " out of range");
  const double h = g.spacing(axis);
  std::vector<double> d(u.size());
  parallel_chunks_capture(
      u.size(), kDefaultChunk, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
          const auto fwd = g.active_neighbor(k, axis, +1);
          const auto bwd = g.active_neighbor(k, axis, -1);
          if (fwd && bwd) {
            d[k] = (u[*fwd] - u[*bwd]) / (2.0 * h);
          } else if (fwd) {
            const auto fwd2 = g.active_neighbor(k, axis, +2);
            d[k] = fwd2 ? (-3.0 * u[k] + 4.0 * u[*fwd] - u[*fwd2]) / (2.0 * h)
                        : (u[*fwd] - u[k]) / h;
          } else if (bwd) {
            const auto bwd2 = g.active_neighbor(k, axis, -2);
            d[k] = bwd2 ? (3.0 * u[k] - 4.0 * u[*bwd] + u[*bwd2]) / (2.0 * h)
                        : (u[k] - u[*bwd]) / h;
          } else {
            throw IsolatedCellError(k, axis);
          }
        }
      });
  return GridFunction(u.grid(), std::move(d));
}

// Midpoint-rule integral over the active region.  The quadrature weight is
// uniform, so it factors out of the fixed-tree sum.
inline double integrate(const GridFunction& u) {
  return u.grid()->cell_volume() *
         pairwise_sum(u.size(), [&](std::size_t k) { return u[k]; });
}

// --- CSV ------------------------------------------------------------------
// Columns: i1,...,iN (zero-based multi-index), x1,...,xN (cell center),
// value.  Rows follow the active order, so the file is a faithful dump of
// the function.

inline void write_grid_csv(const GridFunction& u, std::ostream& os) {
  const Grid& g = *u.grid();
  const int n = g.dim();
  for (int a = 0; a < n; ++a) os << "i" << (a + 1) << ",";
  for (int a = 0; a < n; ++a) os << "x" << (a + 1) << ",";
  os << "value\n";
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::vector<double> pt(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < u.size(); ++k) {
    g.multi_index(k, idx.data());
    g.cell_center(k, pt.data());
    for (int a = 0; a < n; ++a) os << idx[static_cast<std::size_t>(a)] << ",";
    for (int a = 0; a < n; ++a)
      os << format_double(pt[static_cast<std::size_t>(a)]) << ",";
    os << format_double(u[k]) << "\n";
  }
}

// Reads a function dump back onto the given grid, checking that the header,
// the row count, and every multi-index match the grid's active order.
inline GridFunction read_grid_csv(const GridPtr& grid, std::istream& is) {
  const Grid& g = *grid;
  const int n = g.dim();
  std::string line;
  if (!std::getline(is, line)) throw GridError("CSV import: empty input");
  {
    std::ostringstream expect;
    for (int a = 0; a < n; ++a) expect << "i" << (a + 1) << ",";
    for (int a = 0; a < n; ++a) expect << "x" << (a + 1) << ",";
    expect << "value";
    if (line != expect.str())
      throw GridError("CSV import: header mismatch, expected \"" +
                      expect.str() + "\"");
  }
  std::vector<double> v;
  v.reserve(g.active_count());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::size_t row = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (row >= g.active_count())
      throw GridError("CSV import: more rows than active cells");
    std::istringstream ss(line);
    std::string cell;
    std::vector<std::string> fields;
    while (std::getline(ss, cell, ',')) fields.push_back(cell);
    if (fields.size() != static_cast<std::size_t>(2 * n + 1))
      throw GridError("CSV import: row " + std::to_string(row + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(2 * n + 1));
    g.multi_index(row, idx.data());
    for (int a = 0; a < n; ++a) {
      if (std::to_string(idx[static_cast<std::size_t>(a)]) !=
          fields[static_cast<std::size_t>(a)])
        throw GridError("CSV import: row " + std::to_string(row + 1) +
                        " multi-index does not match the grid's active order");
    }
    try {
      v.push_back(std::stod(fields.back()));
    } catch (const std::exception&) {
      throw GridError("CSV import: row " + std::to_string(row + 1) +
                      " has a malformed value field");
    }
    ++row;
  }
  if (row != g.active_count())
    throw GridError("CSV import: " + std::to_string(row) +
                    " rows for " + std::to_string(g.active_count()) +
                    " active cells");
  return GridFunction(grid, std::move(v));
}

}  // namespace holderlab
