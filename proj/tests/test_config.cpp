#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "holderlab/cli.hpp"

using namespace holderlab;

TEST_CASE("config text round-trips", "[config]") {
  RunConfig cfg;
  cfg.command = "embed";
  cfg.box = {0.0, 1.0, 0.0, 3.0};
  cfg.ladder = {32, 64};
  cfg.predicate = "x1^2 + x2^2 < 1";
  cfg.p = {"4 - 0.1*x1", "3 + 0.2*x2"};
  cfg.family = "trig";
  cfg.family_count = 7;
  cfg.family_max_frequency = 2;
  cfg.family_terms = 3;
  cfg.family_coeff_bound = 0.75;
  cfg.pairs = "sampled";
  cfg.budget = 12345;
  cfg.seed = 99;
  cfg.allow_hypothesis_violation = true;
  cfg.beta_literal_first = true;

  const std::string text = config_to_text(cfg);
  RunConfig back;
  std::istringstream is(text);
  apply_config_file(is, back);
  REQUIRE(config_to_text(back) == text);
  REQUIRE(back.command == "embed");
  REQUIRE(back.box == cfg.box);
  REQUIRE(back.ladder == cfg.ladder);
  REQUIRE(back.p == cfg.p);
  REQUIRE(back.seed.has_value());
  REQUIRE(*back.seed == 99);
  REQUIRE(back.allow_hypothesis_violation);
}

TEST_CASE("config file syntax", "[config]") {
  RunConfig cfg;
  std::istringstream is(
      "# a comment\n"
      "command = norms\n"
      "\n"
      "box = 0, 1, 0, 1\n"
      "resolutions = 16\n"
      "p1 = 2 + x1\n"
      "p2 = 3\n"
      "u = sin(pi*x1)*x2\n"
      "pairs = exhaustive\n");
  apply_config_file(is, cfg);
  REQUIRE(cfg.command == "norms");
  REQUIRE(cfg.box == std::vector<double>{0.0, 1.0, 0.0, 1.0});
  REQUIRE(cfg.resolutions == std::vector<int>{16});
  REQUIRE(cfg.p == std::vector<std::string>{"2 + x1", "3"});
  REQUIRE(cfg.u == std::vector<std::string>{"sin(pi*x1)*x2"});
  REQUIRE(cfg.pairs == "exhaustive");

  // predicates may contain comparison '=' signs; only the first '=' splits
  RunConfig cfg2;
  std::istringstream is2("predicate = x1 <= 0.5\n");
  apply_config_file(is2, cfg2);
  REQUIRE(cfg2.predicate == "x1 <= 0.5");
}

TEST_CASE("config file errors carry line numbers", "[config]") {
  {
    RunConfig cfg;
    std::istringstream is("command = beta\nwat = 7\n");
    try {
      apply_config_file(is, cfg);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  {
    RunConfig cfg;
    std::istringstream is("budget = not-a-number\n");
    REQUIRE_THROWS_AS(apply_config_file(is, cfg), ConfigError);
  }
  {
    RunConfig cfg;
    std::istringstream is("no equals sign here\n");
    REQUIRE_THROWS_AS(apply_config_file(is, cfg), ConfigError);
  }
  {
    RunConfig cfg;
    std::istringstream is("allow_hypothesis_violation = maybe\n");
    REQUIRE_THROWS_AS(apply_config_file(is, cfg), ConfigError);
  }
  {
    RunConfig cfg;
    std::istringstream is("p0 = 4\n");
    REQUIRE_THROWS_AS(apply_config_file(is, cfg), ConfigError);
  }
}

namespace {

RunConfig base_norms() {
  RunConfig cfg;
  cfg.command = "norms";
  cfg.box = {0.0, 1.0, 0.0, 1.0};
  cfg.resolutions = {8};
  cfg.p = {"4"};
  cfg.u = {"x1*x2"};
  cfg.pairs = "exhaustive";
  return cfg;
}

}  // namespace

TEST_CASE("resolve fills defaults and replicates", "[config]") {
  const auto r = resolve(base_norms());
  REQUIRE(r.dim == 2);
  REQUIRE(r.levels.size() == 1);
  REQUIRE(r.levels[0] == std::vector<int>{8, 8});
  REQUIRE(r.p_exprs.size() == 1);  // replication happens at sampling time
  REQUIRE(r.u_exprs.size() == 1);
  REQUIRE(r.policy.mode == PairScanMode::Exhaustive);
  REQUIRE(r.cfg.resolutions == std::vector<int>{8, 8});
}

TEST_CASE("resolve validation failures", "[config]") {
  {
    RunConfig cfg;  // no command
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.command = "unknown";
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.box = {0.0, 1.0, 0.0};  // odd
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.box = {1.0, 0.0, 0.0, 1.0};  // lo >= hi
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.box.clear();
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.resolutions = {8, 8, 8};  // neither 1 nor dim
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.p = {"4", "5", "6"};
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.u = {};  // norms needs exactly one function
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.u = {"x1", "x2"};
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.format = "xml";
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.pairs = "random";
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.budget = 0;
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
}

TEST_CASE("out-of-dimension variables are configuration errors", "[config]") {
  {
    auto cfg = base_norms();
    cfg.u = {"x3"};
    try {
      resolve(cfg);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      REQUIRE(std::string(e.what()).find("x3") != std::string::npos);
    }
  }
  {
    auto cfg = base_norms();
    cfg.p = {"2 + x3"};
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.predicate = "x3 > 0";
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    auto cfg = base_norms();
    cfg.u = {"sin(pi*"};  // parse failures surface as config errors
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
}

TEST_CASE("sampled scans demand a seed", "[config]") {
  auto cfg = base_norms();
  cfg.pairs = "sampled";
  cfg.seed.reset();
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  cfg.seed = 5;
  REQUIRE_NOTHROW(resolve(cfg));
  // exhaustive mode never samples, so no seed is fine
  cfg.pairs = "exhaustive";
  cfg.seed.reset();
  REQUIRE_NOTHROW(resolve(cfg));
}

TEST_CASE("embed family inference", "[config]") {
  RunConfig cfg;
  cfg.command = "embed";
  cfg.box = {0.0, 1.0, 0.0, 1.0};
  cfg.ladder = {8, 16};
  cfg.p = {"4"};
  cfg.pairs = "exhaustive";

  // no u and no family: trig, which needs a seed
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  cfg.seed = 3;
  {
    const auto r = resolve(cfg);
    REQUIRE(r.cfg.family == "trig");
    REQUIRE(r.levels.size() == 2);
    REQUIRE(r.levels[1] == std::vector<int>{16, 16});
  }

  // an explicit function list flips the inference
  cfg.u = {"x1", "x1*x2"};
  {
    const auto r = resolve(cfg);
    REQUIRE(r.cfg.family == "list");
    REQUIRE(r.u_exprs.size() == 2);
  }

  // contradictions are rejected
  cfg.family = "trig";
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  cfg.family = "list";
  cfg.u = {};
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  cfg.family = "banana";
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
}

TEST_CASE("embed requires a ladder", "[config]") {
  RunConfig cfg;
  cfg.command = "embed";
  cfg.box = {0.0, 1.0, 0.0, 1.0};
  cfg.p = {"4"};
  cfg.pairs = "exhaustive";
  cfg.u = {"x1"};
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  cfg.resolutions = {8};  // a plain resolution stands in for a 1-level ladder
  REQUIRE_NOTHROW(resolve(cfg));
}

TEST_CASE("counterexample and app presets resolve", "[config]") {
  {
    RunConfig cfg;
    cfg.command = "counterexample";
    cfg.preset = "mild-cusp";
    cfg.ladder = {16, 32};
    const auto r = resolve(cfg);
    REQUIRE(r.cfg.seed.has_value());  // defaulted for reproducibility
    REQUIRE(*r.cfg.seed == 1);
    REQUIRE(r.cfg.box.size() == 4);  // preset geometry echoed back
    REQUIRE(r.levels.size() == 2);
  }
  {
    RunConfig cfg;
    cfg.command = "counterexample";
    cfg.preset = "warm-cusp";
    cfg.ladder = {16};
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    RunConfig cfg;
    cfg.command = "counterexample";
    cfg.preset = "pronounced-cusp";
    cfg.ladder = {16};
    cfg.alpha = 0.5;  // must exceed 1
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
  {
    RunConfig cfg;
    cfg.command = "app";
    cfg.preset = "porous";
    cfg.resolutions = {12};
    const auto r = resolve(cfg);
    REQUIRE(r.dim == 2);
    REQUIRE(r.levels.size() == 1);
    REQUIRE(r.levels[0] == std::vector<int>{12, 12});
  }
  {
    RunConfig cfg;
    cfg.command = "app";
    cfg.preset = "maxwell";
    cfg.resolutions = {12};
    REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  }
}

TEST_CASE("expr-eval needs expr and a matching point", "[config]") {
  RunConfig cfg;
  cfg.command = "expr-eval";
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);
  cfg.expr = "x1 + x2";
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);  // no point
  cfg.at = {1.0};
  REQUIRE_THROWS_AS(resolve(cfg), ConfigError);  // too short for x2
  cfg.at = {1.0, 2.0};
  const auto r = resolve(cfg);
  REQUIRE(r.eval_expr.valid());
  REQUIRE(r.eval_expr.eval({1.0, 2.0}) == 3.0);
}

TEST_CASE("beta literal-first flag reaches the options", "[config]") {
  RunConfig cfg;
  cfg.command = "beta";
  cfg.box = {0.0, 1.0, 0.0, 1.0};
  cfg.resolutions = {8};
  cfg.p = {"4", "8"};
  cfg.pairs = "exhaustive";
  cfg.beta_literal_first = true;
  const auto r = resolve(cfg);
  REQUIRE(r.beta.literal_first_direction);
}
