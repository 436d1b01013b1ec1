// Minimal library tour: build a masked grid, attach exponent fields, and
// compare the Sobolev norm of a function against its Hoelder norm.

#include <cstdio>

#include "holderlab/holderlab.hpp"

int main() {
  using namespace holderlab;

  const auto pred = DomainPredicate::parse("x1^2 + x2^2 < 1");
  const auto grid = Grid::build({{-1.0, 1.0}, {-1.0, 1.0}}, {64, 64}, &pred);
  std::printf("unit disk, 64x64 box: %zu active cells, measure %.6f\n",
              grid->active_count(), grid->measure());

  const auto p = ExponentVectorField::sample(
      grid, {FieldExpr::parse("4 - 0.1*x1"), FieldExpr::parse("3 + 0.2*x2")});
  const auto report = validate_hypotheses(p);
  std::printf("hypotheses ok: %s\n", report.ok() ? "yes" : "no");

  const auto beta = beta_exponents(p);
  std::printf("beta range: [%.6f, %.6f] x [%.6f, %.6f]\n",
              beta.direction_min(0), beta.direction_max(0),
              beta.direction_min(1), beta.direction_max(1));

  const auto u = sample(grid, FieldExpr::parse("sin(pi*x1) * cos(pi*x2)"));
  const auto sob = sobolev_norm(u, p);

  PairScanPolicy policy;
  policy.mode = PairScanMode::Sampled;
  policy.pair_budget = 50000;
  policy.seed = 1;
  const auto hoe = hoelder_norm(u, beta, policy);

  std::printf("sobolev %.9f   hoelder %.9f   ratio %.9f\n", sob.value,
              hoe.norm, hoe.norm / sob.value);
  return 0;
}
