#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "holderlab/errors.hpp"
#include "holderlab/expr.hpp"
#include "holderlab/exponents.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/hoelder.hpp"
#include "holderlab/norms.hpp"
#include "holderlab/parallel.hpp"

// The experiment layer: generate families of test functions, sweep grid
// ladders, and compare Sobolev-type norms against Hoelder-type norms cell
// for cell.  Also the cusp-domain explorer, which deliberately walks into
// territory where the hypotheses fail and watches what the quotients do.

namespace holderlab {

// --- function families ----------------------------------------------------

struct TrigFamilySpec {
  int count = 20;
  int max_frequency = 3;
  int terms = 4;
  double coeff_bound = 1.0;
  std::uint64_t seed = 0;
};

// Random trigonometric polynomials: each member is a sum of `terms` products
// coeff * prod_i sin_or_cos(k_i * pi * x_i), with k_i drawn from
// {0, ..., max_frequency} (frequency 0 drops the factor) and coefficients
// uniform in [-coeff_bound, coeff_bound].  Every draw is a counter hash of
// (seed, member, term), so the family depends only on the spec, never on
// evaluation order.
class FunctionFamily {
 public:
  static FunctionFamily trig(const TrigFamilySpec& spec, int dim) {
    if (spec.count < 1 || spec.terms < 1 || spec.max_frequency < 0 ||
        !(spec.coeff_bound > 0.0))
      throw ConfigError("trig family: count and terms must be >= 1, "
                        "max_frequency >= 0, coeff_bound > 0");
    FunctionFamily fam;
    fam.kind_ = "trig";
    for (int m = 0; m < spec.count; ++m) {
      FieldExpr member;
      for (int t = 0; t < spec.terms; ++t) {
        const std::uint64_t base = hash_combine(
            spec.seed, (static_cast<std::uint64_t>(m) << 32) |
                           static_cast<std::uint64_t>(t));
        const double c =
            spec.coeff_bound * (2.0 * hash_to_unit(hash_combine(base, 0)) - 1.0);
        FieldExpr term = c >= 0.0
                             ? FieldExpr::number(c)
                             : FieldExpr::unary(UnaryOp::Neg, FieldExpr::number(-c));
        for (int axis = 1; axis <= dim; ++axis) {
          const std::uint64_t ha =
              hash_combine(base, static_cast<std::uint64_t>(axis));
          const int freq = static_cast<int>(
              ha % static_cast<std::uint64_t>(spec.max_frequency + 1));
          if (freq == 0) continue;
          const bool use_cos =
              (hash_combine(base, 100 + static_cast<std::uint64_t>(axis)) & 1) != 0;
          FieldExpr phase = FieldExpr::binary(BinaryOp::Mul, FieldExpr::pi(),
                                              FieldExpr::variable(axis));
          if (freq > 1)
            phase = FieldExpr::binary(BinaryOp::Mul, FieldExpr::number(freq),
                                      std::move(phase));
          term = FieldExpr::binary(
              BinaryOp::Mul, std::move(term),
              FieldExpr::unary(use_cos ? UnaryOp::Cos : UnaryOp::Sin,
                               std::move(phase)));
        }
        member = member.valid()
                     ? FieldExpr::binary(BinaryOp::Add, std::move(member),
                                         std::move(term))
                     : std::move(term);
      }
      fam.fns_.push_back(std::move(member));
    }
    return fam;
  }

  static FunctionFamily list(std::vector<FieldExpr> fns) {
    if (fns.empty()) throw ConfigError("function family must not be empty");
    FunctionFamily fam;
    fam.kind_ = "list";
    fam.fns_ = std::move(fns);
    return fam;
  }

  const std::vector<FieldExpr>& functions() const { return fns_; }
  const std::string& kind() const { return kind_; }

 private:
  FunctionFamily() = default;
  std::string kind_;
  std::vector<FieldExpr> fns_;
};

// --- embedding survey ------------------------------------------------------

struct SurveySetup {
  std::vector<AxisRange> box;
  DomainPredicate predicate;  // optional; valid() gates use
  std::vector<FieldExpr> p_exprs;
  BetaOptions beta;
  PairScanPolicy policy;
  bool allow_hypothesis_violation = false;
};

struct FunctionRecord {
  int index = 0;
  std::string source;
  NormResult sobolev;
  HoelderResult hoelder;
  double ratio = 0.0;  // hoelder.norm / sobolev.value
};

struct SurveyLevel {
  std::vector<int> resolutions;
  std::size_t active_cells = 0;
  HypothesisReport hypothesis;
  std::vector<double> beta_min, beta_max;  // per direction
  std::vector<FunctionRecord> functions;
  double max_ratio = 0.0;  // over finite ratios; 0 when none
  PairScanMode mode_used = PairScanMode::Exhaustive;
  std::uint64_t pairs_evaluated = 0;
  std::uint64_t seed = 0;
};

struct SurveyReport {
  std::vector<SurveyLevel> levels;
  double overall_max_ratio = 0.0;
};

// Runs the norm comparison for every family member on every rung of the
// ladder.  Refuses (HypothesisError) when the exponent hypotheses fail and
// the setup does not explicitly allow proceeding.
inline SurveyReport embedding_survey(const SurveySetup& setup,
                                     const FunctionFamily& family,
                                     const std::vector<std::vector<int>>& ladder) {
  if (ladder.empty()) throw ConfigError("survey needs at least one grid level");
  SurveyReport report;
  for (const auto& res : ladder) {
    GridPtr grid = Grid::build(setup.box, res,
                               setup.predicate.valid() ? &setup.predicate : nullptr);
    ExponentVectorField p = ExponentVectorField::sample(grid, setup.p_exprs);
    SurveyLevel level;
    level.resolutions = res;
    level.active_cells = grid->active_count();
    level.hypothesis = validate_hypotheses(p);
    if (!level.hypothesis.ok() && !setup.allow_hypothesis_violation)
      throw HypothesisError(level.hypothesis.violating_cells);
    BetaField beta = beta_exponents(p, setup.beta);
    for (int a = 0; a < beta.directions(); ++a) {
      level.beta_min.push_back(beta.direction_min(a));
      level.beta_max.push_back(beta.direction_max(a));
    }
    double max_ratio = 0.0;
    for (std::size_t i = 0; i < family.functions().size(); ++i) {
      const FieldExpr& f = family.functions()[i];
      FunctionRecord rec;
      rec.index = static_cast<int>(i);
      rec.source = f.unparse();
      GridFunction u = GridFunction::sample(grid, f);
      rec.sobolev = sobolev_norm(u, p);
      rec.hoelder = hoelder_norm(u, beta, setup.policy);
      rec.ratio = rec.hoelder.norm / rec.sobolev.value;
      if (std::isfinite(rec.ratio)) max_ratio = std::max(max_ratio, rec.ratio);
      level.functions.push_back(std::move(rec));
    }
    level.max_ratio = max_ratio;
    if (!level.functions.empty()) {
      level.mode_used = level.functions.front().hoelder.mode_used;
      level.pairs_evaluated = level.functions.front().hoelder.pairs_evaluated;
      level.seed = level.functions.front().hoelder.seed;
    }
    report.overall_max_ratio = std::max(report.overall_max_ratio, max_ratio);
    report.levels.push_back(std::move(level));
  }
  return report;
}

// --- reduction checks ------------------------------------------------------

// With one exponent field replicated across all directions, every
// regularity exponent must collapse to 1 - N/p(x) pointwise.  Reports the
// largest deviation over cells and directions.
struct UniformReductionReport {
  double max_deviation = 0.0;
  bool pass = false;
  double tolerance = 1e-12;
};

inline UniformReductionReport uniform_reduction_check(
    const GridPtr& grid, const FieldExpr& p_expr, const BetaOptions& opt = {}) {
  ExponentVectorField p = ExponentVectorField::sample(grid, {p_expr});
  BetaField beta = beta_exponents(p, opt);
  const double N = grid->dim();
  UniformReductionReport rep;
  for (std::size_t k = 0; k < grid->active_count(); ++k) {
    const double expected = 1.0 - N / p.value(k, 0);
    for (int a = 0; a < beta.directions(); ++a)
      rep.max_deviation = std::max(rep.max_deviation,
                                   std::fabs(beta.value(k, a) - expected));
  }
  rep.pass = rep.max_deviation <= rep.tolerance;
  return rep;
}

// For constant scalar exponents p > N the single regularity exponent
// 1 - N/p climbs toward 1 as p grows.  Evaluates the ladder through the full
// machinery (constant fields on a minimal grid) and reports the trend.
struct ScalarTrendReport {
  std::vector<double> p_values;
  std::vector<double> beta_values;
  bool strictly_increasing = false;
  bool all_below_one = false;
};

inline ScalarTrendReport scalar_exponent_trend(const std::vector<double>& ladder,
                                               int dim) {
  if (ladder.empty()) throw ConfigError("exponent ladder must not be empty");
  ScalarTrendReport rep;
  rep.p_values = ladder;
  std::vector<AxisRange> box(static_cast<std::size_t>(dim), AxisRange{0.0, 1.0});
  std::vector<int> res(static_cast<std::size_t>(dim), 2);
  GridPtr grid = Grid::build(box, res);
  for (double pv : ladder) {
    if (!(pv > dim))
      throw ConfigError("scalar exponent " + format_double(pv) +
                        " must exceed the dimension " + std::to_string(dim));
    ExponentVectorField p =
        ExponentVectorField::sample(grid, {FieldExpr::number(pv)});
    BetaField beta = beta_exponents(p);
    rep.beta_values.push_back(beta.value(0, 0));
  }
  rep.strictly_increasing = true;
  rep.all_below_one = true;
  for (std::size_t i = 0; i < rep.beta_values.size(); ++i) {
    if (i > 0 && !(rep.beta_values[i] > rep.beta_values[i - 1]))
      rep.strictly_increasing = false;
    if (!(rep.beta_values[i] < 1.0)) rep.all_below_one = false;
  }
  return rep;
}

// --- cusp-domain explorer ---------------------------------------------------

// A deliberately hostile setup: a domain pinched along a curve, exponents
// allowed to sink toward the dimension, and a function chosen to stress the
// pinch.  Runs always proceed (violations are recorded, never fatal) and
// per-level norm failures are captured instead of aborting the ladder.
struct CuspSpec {
  std::string id;  // "mild-cusp", "pronounced-cusp", or "custom"
  double alpha = 3.0;
  std::vector<AxisRange> box;
  std::string predicate_src;
  std::vector<std::string> p_srcs;
  std::string u_src;
};

inline CuspSpec mild_cusp_preset() {
  CuspSpec s;
  s.id = "mild-cusp";
  s.box = {{0.0, 1.0}, {0.0, 2.0}};
  s.predicate_src = "x1^2 < x2 & x2 < 2*x1^2";
  s.p_srcs = {"4"};
  s.u_src = "sqrt(x1)";
  return s;
}

inline CuspSpec pronounced_cusp_preset(double alpha = 3.0) {
  if (!(alpha > 1.0))
    throw ConfigError("cusp sharpness must exceed 1");
  CuspSpec s;
  s.id = "pronounced-cusp";
  s.alpha = alpha;
  s.box = {{-1.0, 1.0}, {0.0, 1.0}};
  s.predicate_src = "x2 > abs(x1)^" + format_double(alpha);
  s.p_srcs = {"2+sin(pi*x1)", "2+cos(pi*x2)"};
  s.u_src = "sqrt(x2-abs(x1)^" + format_double(alpha) + ")";
  return s;
}

struct CuspLevel {
  std::vector<int> resolutions;
  std::size_t active_cells = 0;
  std::size_t violating_cells = 0;
  double max_quotient = 0.0;
  std::size_t argmax_a = 0, argmax_b = 0;
  std::vector<double> argmax_a_center, argmax_b_center;
  bool sobolev_ok = false;
  double sobolev = 0.0;
  std::string sobolev_error;
  // distance from the argmax pair (nearer cell) to the cusp curve; NaN when
  // the CuspSpec has no analytic curve to measure against
  double argmax_distance = std::numeric_limits<double>::quiet_NaN();
  PairScanMode mode_used = PairScanMode::Exhaustive;
  std::uint64_t pairs_evaluated = 0;
};

struct CuspReport {
  CuspSpec spec;
  std::vector<std::vector<int>> skipped;  // levels with too few active cells
  std::vector<CuspLevel> levels;
  std::vector<double> quotient_growth;  // consecutive max-quotient ratios
};

namespace detail {

// Distance from a point to the preset's cusp curve(s), by dense sampling.
inline double cusp_curve_distance(const CuspSpec& spec, const double* pt) {
  constexpr int kSamples = 8192;
  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](double x, double y) {
    const double dx = pt[0] - x, dy = pt[1] - y;
    best = std::min(best, std::sqrt(dx * dx + dy * dy));
  };
  if (spec.id == "mild-cusp") {
    for (int s = 0; s <= kSamples; ++s) {
      const double x = static_cast<double>(s) / kSamples;
      consider(x, x * x);
      consider(x, 2.0 * x * x);
    }
    return best;
  }
  if (spec.id == "pronounced-cusp") {
    for (int s = 0; s <= kSamples; ++s) {
      const double x = -1.0 + 2.0 * static_cast<double>(s) / kSamples;
      consider(x, std::pow(std::fabs(x), spec.alpha));
    }
    return best;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

inline CuspReport counterexample_run(const CuspSpec& spec,
                                     const std::vector<std::vector<int>>& ladder,
                                     const PairScanPolicy& policy = {}) {
  if (ladder.empty()) throw ConfigError("cusp run needs at least one grid level");
  CuspReport report;
  report.spec = spec;
  DomainPredicate pred;
  if (!spec.predicate_src.empty())
    pred = DomainPredicate::parse(spec.predicate_src);
  std::vector<FieldExpr> p_exprs;
  for (const auto& src : spec.p_srcs) p_exprs.push_back(FieldExpr::parse(src));
  const FieldExpr u_expr = FieldExpr::parse(spec.u_src);

  for (const auto& res : ladder) {
    GridPtr grid;
    try {
      grid = Grid::build(spec.box, res, pred.valid() ? &pred : nullptr);
    } catch (const EmptyDomainError&) {
      report.skipped.push_back(res);
      continue;
    }
    ExponentVectorField p = ExponentVectorField::sample(grid, p_exprs);
    CuspLevel level;
    level.resolutions = res;
    level.active_cells = grid->active_count();
    level.violating_cells = validate_hypotheses(p).violating_cells;
    BetaField beta = beta_exponents(p);
    GridFunction u = GridFunction::sample(grid, u_expr);
    HoelderResult scan = hoelder_seminorm(u, beta, policy);
    level.max_quotient = scan.seminorm;
    level.argmax_a = scan.argmax_a;
    level.argmax_b = scan.argmax_b;
    level.argmax_a_center = scan.argmax_a_center;
    level.argmax_b_center = scan.argmax_b_center;
    level.mode_used = scan.mode_used;
    level.pairs_evaluated = scan.pairs_evaluated;
    try {
      level.sobolev = sobolev_norm(u, p).value;
      level.sobolev_ok = true;
    } catch (const Error& e) {
      level.sobolev_ok = false;
      level.sobolev_error = e.what();
    }
    if (grid->dim() == 2 && !level.argmax_a_center.empty()) {
      const double da =
          detail::cusp_curve_distance(spec, level.argmax_a_center.data());
      const double db =
          detail::cusp_curve_distance(spec, level.argmax_b_center.data());
      level.argmax_distance = std::min(da, db);
    }
    report.levels.push_back(std::move(level));
  }
  if (report.levels.empty())
    throw EmptyDomainError("every ladder level had fewer than two active cells");
  for (std::size_t i = 1; i < report.levels.size(); ++i) {
    const double prev = report.levels[i - 1].max_quotient;
    report.quotient_growth.push_back(
        prev > 0.0 ? report.levels[i].max_quotient / prev
                   : std::numeric_limits<double>::quiet_NaN());
  }
  return report;
}

// --- application presets ----------------------------------------------------

struct AppPreset {
  std::string id;  // "heat" | "porous"
  std::vector<AxisRange> box;
  std::vector<std::string> p_srcs;
  std::string u_src;
};

inline AppPreset application_preset_spec(const std::string& id) {
  AppPreset a;
  a.id = id;
  if (id == "heat") {
    // anisotropic diffusion: conductivity exponents dip to the dimension
    // along the slab's midline, so the hypothesis check must trip
    a.box = {{0.0, 1.0}, {0.0, 2.0}};
    a.p_srcs = {"3+sin(pi*x1)", "2+0.5*cos(pi*x2)"};
    a.u_src = "sin(pi*x1)*exp(-x2)";
    return a;
  }
  if (id == "porous") {
    // porous-medium profile: exponents drift gently with depth, hypotheses
    // hold with room to spare
    a.box = {{0.0, 1.0}, {0.0, 3.0}};
    a.p_srcs = {"4-0.1*x1", "3+0.2*x2"};
    a.u_src = "sin(2*pi*x1)*x2^2*exp(-x2)";
    return a;
  }
  throw ConfigError("unknown application preset \"" + id +
                    "\" (try \"heat\" or \"porous\")");
}

inline SurveyReport run_application_preset(const std::string& id,
                                           const std::vector<int>& resolutions,
                                           const PairScanPolicy& policy,
                                           bool allow_violation) {
  const AppPreset a = application_preset_spec(id);
  SurveySetup setup;
  setup.box = a.box;
  for (const auto& src : a.p_srcs)
    setup.p_exprs.push_back(FieldExpr::parse(src));
  setup.policy = policy;
  setup.allow_hypothesis_violation = allow_violation;
  FunctionFamily fam = FunctionFamily::list({FieldExpr::parse(a.u_src)});
  return embedding_survey(setup, fam, {resolutions});
}

}  // namespace holderlab
