#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "holderlab/cli.hpp"
#include "holderlab/version.hpp"

int main(int argc, char** argv) {
  using namespace holderlab;
  RunConfig cfg;

  // A config file, if any, is applied first so that explicit flags override it.
  // CLI11 only assigns bound variables for options actually given, which makes
  // the layering trivial: pre-load cfg, then let the parser overwrite.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      config_path = argv[i + 1];
    } else if (a.rfind("--config=", 0) == 0) {
      config_path = a.substr(9);
    }
  }
  if (!config_path.empty()) {
    std::ifstream f(config_path);
    if (!f) {
      std::cerr << "config error: cannot open \"" << config_path << "\"\n";
      return 2;
    }
    try {
      apply_config_file(f, cfg);
    } catch (const Error& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App app{"anisotropic variable-exponent Sobolev / Hoelder norm toolkit"};
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);

  std::string config_opt;  // consumed above; declared so the flag is known
  app.add_option("--config", config_opt,
                 "flat `key = value` configuration file (flags override it)");

  app.add_option("--box", cfg.box, "domain box lo1,hi1,lo2,hi2,...")
      ->delimiter(',');
  app.add_option("--resolutions", cfg.resolutions,
                 "cells per axis; a single value is replicated")
      ->delimiter(',');
  app.add_option("--ladder", cfg.ladder,
                 "base resolution per refinement level")
      ->delimiter(',');
  app.add_option("--predicate", cfg.predicate, "domain membership predicate");
  app.add_option("--p", cfg.p,
                 "exponent expression per direction (repeatable; a single "
                 "value is replicated)");
  app.add_option("--u", cfg.u, "function expression (repeatable)");
  app.add_option("--family", cfg.family, "embed family kind: trig | list");
  app.add_option("--family-count", cfg.family_count, "trig family size");
  app.add_option("--family-max-frequency", cfg.family_max_frequency,
                 "largest trig wave number");
  app.add_option("--family-terms", cfg.family_terms, "terms per trig member");
  app.add_option("--family-coeff-bound", cfg.family_coeff_bound,
                 "trig coefficient bound");
  app.add_option("--pairs", cfg.pairs, "pair scan mode: sampled | exhaustive");
  app.add_option("--budget", cfg.budget, "sampled pair budget");
  app.add_option("--seed", cfg.seed,
                 "random seed (required whenever sampling can occur)");
  app.add_flag("--allow-hypothesis-violation", cfg.allow_hypothesis_violation,
               "proceed even when the exponent hypotheses fail");
  app.add_flag("--beta-literal-first", cfg.beta_literal_first,
               "use the first direction's exponent in every denominator");
  app.add_option("--preset", cfg.preset,
                 "counterexample: mild-cusp | pronounced-cusp; app: heat | "
                 "porous");
  app.add_option("--alpha", cfg.alpha, "cusp sharpness for pronounced-cusp");
  app.add_option("--at", cfg.at, "evaluation point v1,v2,...")->delimiter(',');
  app.add_option("--expr", cfg.expr, "expression for expr-eval");
  app.add_option("--out", cfg.out, "write the report here instead of stdout");
  app.add_option("--format", cfg.format, "report format: json | csv");
  app.add_option("--field-csv", cfg.field_csv,
                 "side dump of the per-cell regularity field (beta)");
  app.add_option("--pairs-csv", cfg.pairs_csv,
                 "side dump of scanned pair quotients (norms)");
  app.add_option("--threads", cfg.threads,
                 "worker cap (same effect as HOLDERLAB_THREADS)");

  struct SubDesc {
    const char* name;
    const char* help;
  };
  const SubDesc kSubs[] = {
      {"beta", "regularity exponent field and diagnostics"},
      {"norms", "Sobolev and Hoelder norms of one function"},
      {"embed", "embedding-constant survey over a function family"},
      {"counterexample", "cusp-domain stress ladder"},
      {"app", "named application preset"},
      {"expr-eval", "evaluate one expression at one point"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& s : kSubs) {
    subs.push_back(app.add_subcommand(s.name, s.help));
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (const auto* sub : subs) {
    if (sub->parsed()) cfg.command = sub->get_name();
  }

  if (cfg.threads > 0) {
    ::setenv("HOLDERLAB_THREADS", std::to_string(cfg.threads).c_str(), 1);
  }

  return run_command(cfg, std::cout, std::cerr);
}
