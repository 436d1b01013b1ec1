#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "holderlab/exponents.hpp"

using namespace holderlab;

namespace {

GridPtr unit_square(int n) {
  return Grid::build({{0.0, 1.0}, {0.0, 1.0}}, {n, n});
}

}  // namespace

TEST_CASE("construction requires exponents above one", "[exponents]") {
  const auto g = unit_square(4);
  REQUIRE_THROWS_AS(
      ExponentVectorField({constant(g, 0.9), constant(g, 4.0)}),
      HypothesisError);
  REQUIRE_THROWS_AS(
      ExponentVectorField({constant(g, 1.0), constant(g, 4.0)}),
      HypothesisError);
  REQUIRE_NOTHROW(ExponentVectorField({constant(g, 1.0001), constant(g, 4.0)}));

  // direction count must match the grid dimension
  REQUIRE_THROWS_AS(ExponentVectorField({constant(g, 4.0)}), GridError);
}

TEST_CASE("single expression replicates to all directions", "[exponents]") {
  const auto g = unit_square(4);
  const auto p = ExponentVectorField::sample(g, {FieldExpr::parse("4")});
  REQUIRE(p.directions() == 2);
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    REQUIRE(p.value(k, 0) == 4.0);
    REQUIRE(p.value(k, 1) == 4.0);
    REQUIRE(p.pointwise_min(k) == 4.0);
    REQUIRE(p.pointwise_max(k) == 4.0);
  }
}

TEST_CASE("pointwise extrema and direction extrema", "[exponents]") {
  const auto g = unit_square(8);
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("4 - 0.1*x1"), FieldExpr::parse("3 + 0.2*x2")});
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    const double a = p.value(k, 0), b = p.value(k, 1);
    REQUIRE(p.pointwise_min(k) == std::min(a, b));
    REQUIRE(p.pointwise_max(k) == std::max(a, b));
  }
  REQUIRE(p.direction_min(0) > 3.9);
  REQUIRE(p.direction_max(0) < 4.0);
  REQUIRE(p.direction_min(1) > 3.0);
  REQUIRE(p.direction_max(1) < 3.2);
}

TEST_CASE("harmonic mean", "[exponents]") {
  const auto g = unit_square(4);
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("4"), FieldExpr::parse("8")});
  const auto pbar = harmonic_mean(p);
  for (std::size_t k = 0; k < g->active_count(); ++k)
    REQUIRE(pbar[k] == 16.0 / 3.0);

  // always sandwiched between the pointwise extremes
  const auto q = ExponentVectorField::sample(
      g, {FieldExpr::parse("2 + x1"), FieldExpr::parse("3 + x2^2")});
  const auto qbar = harmonic_mean(q);
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    REQUIRE(qbar[k] >= q.pointwise_min(k) - 1e-12);
    REQUIRE(qbar[k] <= q.pointwise_max(k) + 1e-12);
  }
}

TEST_CASE("critical exponent", "[exponents]") {
  const auto g = unit_square(4);
  {
    // harmonic mean 1.5 < N=2: finite critical exponent 2*1.5/(2-1.5) = 6
    const auto p = ExponentVectorField::sample(g, {FieldExpr::parse("1.5")});
    const auto crit = critical_exponent(harmonic_mean(p), 2);
    REQUIRE(crit.finite_count() == g->active_count());
    for (std::size_t k = 0; k < crit.size(); ++k) REQUIRE(crit[k] == 6.0);
  }
  {
    // harmonic mean 4 >= N=2: infinite everywhere
    const auto p = ExponentVectorField::sample(g, {FieldExpr::parse("4")});
    const auto crit = critical_exponent(harmonic_mean(p), 2);
    REQUIRE(crit.finite_count() == 0);
    for (std::size_t k = 0; k < crit.size(); ++k) REQUIRE(crit.infinite_at(k));
  }
  {
    // mixed: finite below the dimension, infinite at or above it
    const auto p = ExponentVectorField::sample(g, {FieldExpr::parse("1.2 + x1")});
    const auto pbar = harmonic_mean(p);
    const auto crit = critical_exponent(pbar, 2);
    std::size_t finite = 0;
    for (std::size_t k = 0; k < crit.size(); ++k) {
      if (pbar[k] < 2.0) {
        ++finite;
        REQUIRE(std::fabs(crit[k] - 2.0 * pbar[k] / (2.0 - pbar[k])) <= 1e-12);
      } else {
        REQUIRE(crit.infinite_at(k));
      }
    }
    REQUIRE(crit.finite_count() == finite);
    REQUIRE(finite > 0);
    REQUIRE(finite < crit.size());
  }
}

TEST_CASE("regularity exponents: uniform case is exact", "[exponents]") {
  const auto g = unit_square(4);
  const auto p = ExponentVectorField::sample(g, {FieldExpr::parse("4")});
  const auto beta = beta_exponents(p);
  REQUIRE(beta.directions() == 2);
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    REQUIRE(beta.value(k, 0) == 0.5);
    REQUIRE(beta.value(k, 1) == 0.5);
  }
}

TEST_CASE("regularity exponents: anisotropic constant case", "[exponents]") {
  const auto g = unit_square(4);
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("4"), FieldExpr::parse("8")});
  const auto beta = beta_exponents(p);
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    REQUIRE(beta.value(k, 0) == 5.0 / 9.0);
    REQUIRE(beta.value(k, 1) == 5.0 / 7.0);
  }
  REQUIRE(beta.direction_min(0) == 5.0 / 9.0);
  REQUIRE(beta.direction_max(1) == 5.0 / 7.0);
}

TEST_CASE("larger directional exponent gives larger beta", "[exponents]") {
  const auto g = unit_square(8);
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("3.9 + 0.1*x1"), FieldExpr::parse("3 + 0.2*x2")});
  const auto beta = beta_exponents(p);
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    REQUIRE(p.value(k, 1) < p.value(k, 0));
    REQUIRE(beta.value(k, 1) < beta.value(k, 0));
    REQUIRE(beta.value(k, 0) > 0.0);
    REQUIRE(beta.value(k, 0) < 1.0);
  }
}

TEST_CASE("literal-first-direction option", "[exponents]") {
  const auto g = unit_square(4);
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("4"), FieldExpr::parse("8")});
  BetaOptions opt;
  opt.literal_first_direction = true;
  const auto beta = beta_exponents(p, opt);
  // every denominator uses p_1, so both directions agree with beta_1
  for (std::size_t k = 0; k < g->active_count(); ++k) {
    REQUIRE(beta.value(k, 0) == 5.0 / 9.0);
    REQUIRE(beta.value(k, 1) == 5.0 / 9.0);
  }
  const auto plain = beta_exponents(p);
  REQUIRE(plain.value(0, 1) != beta.value(0, 1));
}

TEST_CASE("degenerate denominators are reported", "[exponents]") {
  const auto g = Grid::build({{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}, {2, 2, 2});
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("1.05"), FieldExpr::parse("1.05"),
          FieldExpr::parse("10")});
  try {
    beta_exponents(p);
    FAIL("expected DegenerateDenominatorError");
  } catch (const DegenerateDenominatorError& e) {
    REQUIRE(e.axis() == 2);
    REQUIRE(e.cells().size() == 8);
  }
}

TEST_CASE("pairwise regularity exponent takes the direction minimum",
          "[exponents]") {
  const auto g = unit_square(4);
  const auto p = ExponentVectorField::sample(
      g, {FieldExpr::parse("4 + x1"), FieldExpr::parse("8")});
  const auto beta = beta_exponents(p);
  const std::size_t a = 0, b = 13;
  const auto bp = beta_pair(beta, a, b);
  REQUIRE(bp.size() == 2);
  REQUIRE(bp[0] == std::min(beta.value(a, 0), beta.value(b, 0)));
  REQUIRE(bp[1] == std::min(beta.value(a, 1), beta.value(b, 1)));

  REQUIRE_THROWS_AS(beta_pair(beta, 3, 3), InvalidPairError);
  REQUIRE_THROWS_AS(beta_pair(beta, 0, 99), InvalidPairError);
}

TEST_CASE("log modulus: constant exponents have zero modulus", "[exponents]") {
  const auto g = unit_square(8);
  const auto r = log_modulus(constant(g, 4.0));
  REQUIRE(r.value == 0.0);
  REQUIRE(r.exhaustive);
  REQUIRE(r.pairs_evaluated > 0);
  REQUIRE_FALSE(r.no_valid_pairs);
}

TEST_CASE("log modulus matches a brute-force oracle", "[exponents]") {
  const auto g = unit_square(8);
  const auto p = sample(g, FieldExpr::parse("2 + x1 + 0.5*x2^2"));
  const auto r = log_modulus(p);
  REQUIRE(r.exhaustive);

  double best = 0.0;
  std::uint64_t valid = 0;
  const std::size_t n = g->active_count();
  std::vector<double> ca(2), cb(2);
  for (std::size_t a = 0; a < n; ++a) {
    g->cell_center(a, ca.data());
    for (std::size_t b = a + 1; b < n; ++b) {
      g->cell_center(b, cb.data());
      const double dx = ca[0] - cb[0], dy = ca[1] - cb[1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (!(dist > 0.0) || !(dist < 0.5)) continue;
      ++valid;
      best = std::max(best, std::fabs(p[a] - p[b]) * (-std::log(dist)));
    }
  }
  REQUIRE(valid > 0);
  REQUIRE(r.value == best);
}

TEST_CASE("log modulus: no pair closer than one half", "[exponents]") {
  const auto g = Grid::build({{0.0, 10.0}, {0.0, 10.0}}, {2, 2});
  const auto r = log_modulus(sample(g, FieldExpr::parse("2 + x1")));
  REQUIRE(r.no_valid_pairs);
  REQUIRE(r.value == 0.0);
}

TEST_CASE("log modulus sampling is deterministic and conservative",
          "[exponents]") {
  const auto g = Grid::build({{0.0, 1.0}, {0.0, 1.0}}, {60, 60});
  const auto p = sample(g, FieldExpr::parse("2 + x1 + 0.5*x2^2"));
  const auto r1 = log_modulus(p, 20000, 7);
  const auto r2 = log_modulus(p, 20000, 7);
  REQUIRE_FALSE(r1.exhaustive);
  REQUIRE(r1.value == r2.value);
  REQUIRE(r1.pairs_evaluated == r2.pairs_evaluated);

  // a sampled scan can never beat the true supremum
  double best = 0.0;
  const std::size_t n = g->active_count();
  std::vector<double> ca(2), cb(2);
  for (std::size_t a = 0; a < n; ++a) {
    g->cell_center(a, ca.data());
    for (std::size_t b = a + 1; b < n; ++b) {
      g->cell_center(b, cb.data());
      const double dx = ca[0] - cb[0], dy = ca[1] - cb[1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      if (!(dist > 0.0) || !(dist < 0.5)) continue;
      best = std::max(best, std::fabs(p[a] - p[b]) * (-std::log(dist)));
    }
  }
  REQUIRE(r1.value <= best);
  REQUIRE(r1.value > 0.0);
}

TEST_CASE("hypothesis validation", "[exponents]") {
  const auto g = unit_square(8);
  {
    const auto p = ExponentVectorField::sample(
        g, {FieldExpr::parse("4 - 0.1*x1"), FieldExpr::parse("3 + 0.2*x2")});
    const auto rep = validate_hypotheses(p);
    REQUIRE(rep.ok());
    REQUIRE(rep.violating_cells == 0);
    REQUIRE(rep.dimension == 2);
    REQUIRE(rep.total_cells == 64);
    REQUIRE(rep.p_min.size() == 2);
    REQUIRE(rep.p_min[0] == p.direction_min(0));
    REQUIRE(rep.p_max[1] == p.direction_max(1));
    REQUIRE(rep.pointwise_min_inf > 2.0);
  }
  {
    // p2 dips to 2 and below: cells with min <= N=2 violate
    const auto p = ExponentVectorField::sample(
        g, {FieldExpr::parse("3 + sin(pi*x1)"),
            FieldExpr::parse("2 + 0.5*cos(pi*x2)")});
    const auto rep = validate_hypotheses(p);
    std::size_t expect = 0;
    for (std::size_t k = 0; k < g->active_count(); ++k)
      if (!(p.pointwise_min(k) > 2.0)) ++expect;
    REQUIRE(expect > 0);
    REQUIRE(rep.violating_cells == expect);
    REQUIRE_FALSE(rep.ok());
  }
}

TEST_CASE("beta CSV has one row per active cell", "[exponents]") {
  const auto g = unit_square(4);
  const auto beta =
      beta_exponents(ExponentVectorField::sample(g, {FieldExpr::parse("4")}));
  std::ostringstream os;
  write_beta_csv(beta, os);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  REQUIRE(line == "i1,i2,x1,x2,beta_1,beta_2");
  std::size_t rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == g->active_count());
}
