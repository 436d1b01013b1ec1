#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "holderlab/embed.hpp"
#include "holderlab/errors.hpp"
#include "holderlab/exponents.hpp"
#include "holderlab/expr.hpp"
#include "holderlab/grid.hpp"
#include "holderlab/hoelder.hpp"
#include "holderlab/json_writer.hpp"
#include "holderlab/norms.hpp"
#include "holderlab/version.hpp"

// Command layer shared by the binary and the tests.  A RunConfig collects
// everything a run needs (from a flat key = value file, from flags, or both
// with flags winning); resolve() validates it into parsed objects; the
// cmd_* functions execute and serialize reports.  Exit codes: 0 success,
// 2 configuration or syntax problem, 3 computation failure, 4 hypothesis
// violation without an override.
//
// Reports echo the run configuration so results are self-describing, but
// deliberately leave out output destination, format, and thread count: the
// same computation must produce the same bytes no matter where it lands or
// how many workers it used.

namespace holderlab {

struct RunConfig {
  std::string command;
  std::vector<double> box;  // lo, hi per axis, flattened
  std::vector<int> resolutions;
  std::vector<int> ladder;  // per-level base resolutions
  std::string predicate;
  std::vector<std::string> p;
  std::vector<std::string> u;
  std::string family;  // "trig" | "list" | "" (inferred)
  int family_count = 10;
  int family_max_frequency = 3;
  int family_terms = 4;
  double family_coeff_bound = 1.0;
  std::string pairs = "sampled";
  std::uint64_t budget = 200000;
  std::optional<std::uint64_t> seed;
  bool allow_hypothesis_violation = false;
  bool beta_literal_first = false;
  std::string preset;
  double alpha = 3.0;
  std::vector<double> at;
  std::string expr;
  // output plumbing; never echoed into reports
  std::string out;
  std::string format = "json";
  std::string field_csv;
  std::string pairs_csv;
  int threads = 0;
};

// --- config file -----------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": \"" + s + "\" is not a number");
  }
}

inline int parse_int(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": \"" + s + "\" is not an integer");
  }
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": \"" + s + "\" is not a non-negative integer");
  }
}

inline bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": \"" + s + "\" is not true/false");
}

inline std::vector<double> parse_double_list(const std::string& s,
                                             const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item, key));
  return out;
}

inline std::vector<int> parse_int_list(const std::string& s,
                                       const std::string& key) {
  std::vector<int> out;
  for (const auto& item : split_list(s)) out.push_back(parse_int(item, key));
  return out;
}

// assigns slot `index` (one-based) of a string list, growing as needed
inline void set_indexed(std::vector<std::string>& v, int index,
                        const std::string& value, const std::string& key) {
  if (index < 1 || index > 16)
    throw ConfigError(key + ": index out of range 1..16");
  if (v.size() < static_cast<std::size_t>(index))
    v.resize(static_cast<std::size_t>(index));
  v[static_cast<std::size_t>(index) - 1] = value;
}

}  // namespace detail

// Applies `key = value` lines from a flat config file on top of `cfg`.
// Unknown keys are errors; '#' starts a comment line.
inline void apply_config_file(std::istream& is, RunConfig& cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    if (key == "command") cfg.command = val;
    else if (key == "box") cfg.box = detail::parse_double_list(val, key);
    else if (key == "resolutions") cfg.resolutions = detail::parse_int_list(val, key);
    else if (key == "ladder") cfg.ladder = detail::parse_int_list(val, key);
    else if (key == "predicate") cfg.predicate = val;
    else if (key == "p") cfg.p = {val};
    else if (key == "u") cfg.u = {val};
    else if (key.size() >= 2 && key[0] == 'p' &&
             key.find_first_not_of("0123456789", 1) == std::string::npos)
      detail::set_indexed(cfg.p, detail::parse_int(key.substr(1), key), val, key);
    else if (key.size() >= 2 && key[0] == 'u' &&
             key.find_first_not_of("0123456789", 1) == std::string::npos)
      detail::set_indexed(cfg.u, detail::parse_int(key.substr(1), key), val, key);
    else if (key == "family") cfg.family = val;
    else if (key == "family_count") cfg.family_count = detail::parse_int(val, key);
    else if (key == "family_max_frequency")
      cfg.family_max_frequency = detail::parse_int(val, key);
    else if (key == "family_terms") cfg.family_terms = detail::parse_int(val, key);
    else if (key == "family_coeff_bound")
      cfg.family_coeff_bound = detail::parse_double(val, key);
    else if (key == "pairs") cfg.pairs = val;
    else if (key == "budget") cfg.budget = detail::parse_u64(val, key);
    else if (key == "seed") cfg.seed = detail::parse_u64(val, key);
    else if (key == "allow_hypothesis_violation")
      cfg.allow_hypothesis_violation = detail::parse_bool(val, key);
    else if (key == "beta_literal_first")
      cfg.beta_literal_first = detail::parse_bool(val, key);
    else if (key == "preset") cfg.preset = val;
    else if (key == "alpha") cfg.alpha = detail::parse_double(val, key);
    else if (key == "at") cfg.at = detail::parse_double_list(val, key);
    else if (key == "expr") cfg.expr = val;
    else if (key == "out") cfg.out = val;
    else if (key == "format") cfg.format = val;
    else if (key == "field_csv") cfg.field_csv = val;
    else if (key == "pairs_csv") cfg.pairs_csv = val;
    else if (key == "threads") cfg.threads = detail::parse_int(val, key);
    else
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key \"" + key + "\"");
  }
}

// Deterministic serialization of the run-relevant part of a config (output
// plumbing excluded).  apply_config_file() on the result reproduces it.
inline std::string config_to_text(const RunConfig& c) {
  std::ostringstream os;
  const auto list_d = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + format_double(v[i]);
    return s;
  };
  const auto list_i = [](const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += (i ? "," : "") + std::to_string(v[i]);
    return s;
  };
  os << "command = " << c.command << "\n";
  if (!c.box.empty()) os << "box = " << list_d(c.box) << "\n";
  if (!c.resolutions.empty())
    os << "resolutions = " << list_i(c.resolutions) << "\n";
  if (!c.ladder.empty()) os << "ladder = " << list_i(c.ladder) << "\n";
  if (!c.predicate.empty()) os << "predicate = " << c.predicate << "\n";
  for (std::size_t i = 0; i < c.p.size(); ++i)
    os << "p" << (i + 1) << " = " << c.p[i] << "\n";
  for (std::size_t i = 0; i < c.u.size(); ++i)
    os << "u" << (i + 1) << " = " << c.u[i] << "\n";
  if (!c.family.empty()) {
    os << "family = " << c.family << "\n";
    if (c.family == "trig") {
      os << "family_count = " << c.family_count << "\n";
      os << "family_max_frequency = " << c.family_max_frequency << "\n";
      os << "family_terms = " << c.family_terms << "\n";
      os << "family_coeff_bound = " << format_double(c.family_coeff_bound)
         << "\n";
    }
  }
  os << "pairs = " << c.pairs << "\n";
  os << "budget = " << c.budget << "\n";
  if (c.seed) os << "seed = " << *c.seed << "\n";
  os << "allow_hypothesis_violation = "
     << (c.allow_hypothesis_violation ? "true" : "false") << "\n";
  os << "beta_literal_first = " << (c.beta_literal_first ? "true" : "false")
     << "\n";
  if (!c.preset.empty()) os << "preset = " << c.preset << "\n";
  if (c.command == "counterexample" && c.preset == "pronounced-cusp")
    os << "alpha = " << format_double(c.alpha) << "\n";
  if (!c.at.empty()) os << "at = " << list_d(c.at) << "\n";
  if (!c.expr.empty()) os << "expr = " << c.expr << "\n";
  return os.str();
}

// --- validation ------------------------------------------------------------

struct ResolvedRun {
  RunConfig cfg;  // normalized: defaults applied, replications done
  int dim = 0;
  std::vector<AxisRange> box;
  std::vector<std::vector<int>> levels;  // per-axis resolutions per level
  DomainPredicate predicate;
  std::vector<FieldExpr> p_exprs;
  std::vector<FieldExpr> u_exprs;
  FieldExpr eval_expr;
  PairScanPolicy policy;
  BetaOptions beta;
};

namespace detail {

inline FieldExpr parse_field(const std::string& src, const std::string& what) {
  try {
    return FieldExpr::parse(src);
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline DomainPredicate parse_pred(const std::string& src,
                                  const std::string& what) {
  try {
    return DomainPredicate::parse(src);
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

inline void check_var_range(int max_var, int dim, const std::string& what) {
  if (max_var > dim)
    throw ConfigError(what + " references x" + std::to_string(max_var) +
                      " but the domain has " + std::to_string(dim) +
                      " dimension(s)");
}

}  // namespace detail

inline ResolvedRun resolve(const RunConfig& in) {
  ResolvedRun r;
  r.cfg = in;
  RunConfig& c = r.cfg;

  static const char* kCommands[] = {"beta",           "norms", "embed",
                                    "counterexample", "app",   "expr-eval"};
  if (std::find_if(std::begin(kCommands), std::end(kCommands),
                   [&](const char* s) { return c.command == s; }) ==
      std::end(kCommands))
    throw ConfigError(c.command.empty()
                          ? "no command given"
                          : "unknown command \"" + c.command + "\"");

  if (c.format != "json" && c.format != "csv")
    throw ConfigError("format must be json or csv");
  if (c.pairs != "sampled" && c.pairs != "exhaustive")
    throw ConfigError("pairs must be sampled or exhaustive");
  if (c.budget < 1) throw ConfigError("budget must be at least 1");

  r.policy.mode = c.pairs == "exhaustive" ? PairScanMode::Exhaustive
                                          : PairScanMode::Sampled;
  r.policy.pair_budget = c.budget;
  r.beta.literal_first_direction = c.beta_literal_first;

  if (c.command == "expr-eval") {
    if (c.expr.empty()) throw ConfigError("expr-eval needs expr = <expression>");
    if (c.at.empty())
      throw ConfigError("expr-eval needs at = <comma-separated point>");
    r.eval_expr = detail::parse_field(c.expr, "expr");
    detail::check_var_range(r.eval_expr.max_var_index(),
                            static_cast<int>(c.at.size()), "expr");
    return r;
  }

  if (c.command == "counterexample" || c.command == "app") {
    // presets own the geometry; the seed defaults to 1 so preset runs are
    // reproducible out of the box
    if (!c.seed) c.seed = 1;
    r.policy.seed = *c.seed;
    if (c.command == "counterexample") {
      CuspSpec spec;
      if (c.preset == "mild-cusp") spec = mild_cusp_preset();
      else if (c.preset == "pronounced-cusp") spec = pronounced_cusp_preset(c.alpha);
      else if (c.preset.empty())
        throw ConfigError("counterexample needs preset = mild-cusp | pronounced-cusp");
      else
        throw ConfigError("unknown counterexample preset \"" + c.preset + "\"");
      // echo the geometry the preset resolved to
      c.box.clear();
      for (const auto& a : spec.box) {
        c.box.push_back(a.lo);
        c.box.push_back(a.hi);
      }
      c.predicate = spec.predicate_src;
      c.p = spec.p_srcs;
      c.u = {spec.u_src};
      if (c.ladder.empty() && c.resolutions.empty())
        throw ConfigError("counterexample needs ladder = n1,n2,... (or resolutions)");
      const int dim = static_cast<int>(spec.box.size());
      if (!c.ladder.empty()) {
        for (int base : c.ladder) {
          if (base < 2) throw ConfigError("ladder entries must be at least 2");
          r.levels.emplace_back(static_cast<std::size_t>(dim), base);
        }
      } else {
        if (c.resolutions.size() != 1 &&
            c.resolutions.size() != static_cast<std::size_t>(dim))
          throw ConfigError("resolutions must have 1 or " +
                            std::to_string(dim) + " entries");
        std::vector<int> res = c.resolutions.size() == 1
                                   ? std::vector<int>(static_cast<std::size_t>(dim),
                                                      c.resolutions[0])
                                   : c.resolutions;
        r.levels.push_back(std::move(res));
      }
      r.dim = dim;
      r.box = spec.box;
      return r;
    }
    // app
    const AppPreset a = application_preset_spec(c.preset.empty() ? "?" : c.preset);
    c.box.clear();
    for (const auto& ar : a.box) {
      c.box.push_back(ar.lo);
      c.box.push_back(ar.hi);
    }
    c.p = a.p_srcs;
    c.u = {a.u_src};
    const int dim = static_cast<int>(a.box.size());
    if (c.resolutions.empty())
      throw ConfigError("app needs resolutions = n (or n1,...,nN)");
    if (c.resolutions.size() != 1 &&
        c.resolutions.size() != static_cast<std::size_t>(dim))
      throw ConfigError("resolutions must have 1 or " + std::to_string(dim) +
                        " entries");
    std::vector<int> res =
        c.resolutions.size() == 1
            ? std::vector<int>(static_cast<std::size_t>(dim), c.resolutions[0])
            : c.resolutions;
    c.resolutions = res;
    r.levels.push_back(std::move(res));
    r.dim = dim;
    r.box = a.box;
    return r;
  }

  // beta | norms | embed: explicit geometry
  if (c.box.empty() || c.box.size() % 2 != 0)
    throw ConfigError("box needs an even number of entries: lo1,hi1,lo2,hi2,...");
  const int dim = static_cast<int>(c.box.size() / 2);
  if (dim > 16) throw ConfigError("dimension larger than 16");
  r.dim = dim;
  for (int a = 0; a < dim; ++a) {
    const double lo = c.box[static_cast<std::size_t>(2 * a)];
    const double hi = c.box[static_cast<std::size_t>(2 * a) + 1];
    if (!(lo < hi))
      throw ConfigError("box axis " + std::to_string(a + 1) +
                        ": need lo < hi");
    r.box.push_back({lo, hi});
  }

  const auto resolve_level = [&](int base) {
    if (base < 2) throw ConfigError("resolutions must be at least 2");
    return std::vector<int>(static_cast<std::size_t>(dim), base);
  };
  if (c.command == "embed" && !c.ladder.empty()) {
    for (int base : c.ladder) r.levels.push_back(resolve_level(base));
  } else {
    if (c.resolutions.empty())
      throw ConfigError(c.command + " needs resolutions = n (or n1,...,nN)" +
                        (c.command == "embed" ? " or ladder = n1,n2,..." : ""));
    if (c.resolutions.size() == 1) {
      r.levels.push_back(resolve_level(c.resolutions[0]));
    } else if (c.resolutions.size() == static_cast<std::size_t>(dim)) {
      for (int n : c.resolutions)
        if (n < 2) throw ConfigError("resolutions must be at least 2");
      r.levels.push_back(c.resolutions);
    } else {
      throw ConfigError("resolutions must have 1 or " + std::to_string(dim) +
                        " entries");
    }
    c.resolutions = r.levels.front();
  }

  if (!c.predicate.empty()) {
    r.predicate = detail::parse_pred(c.predicate, "predicate");
    detail::check_var_range(r.predicate.max_var_index(), dim, "predicate");
  }

  if (c.p.empty())
    throw ConfigError(c.command + " needs exponent fields (p = ... or p1..p" +
                      std::to_string(dim) + ")");
  if (c.p.size() != 1 && c.p.size() != static_cast<std::size_t>(dim))
    throw ConfigError("need 1 or " + std::to_string(dim) +
                      " exponent expressions, got " + std::to_string(c.p.size()));
  for (std::size_t i = 0; i < c.p.size(); ++i) {
    if (c.p[i].empty())
      throw ConfigError("p" + std::to_string(i + 1) + " is missing");
    FieldExpr e = detail::parse_field(c.p[i], "p" + std::to_string(i + 1));
    detail::check_var_range(e.max_var_index(), dim, "p" + std::to_string(i + 1));
    r.p_exprs.push_back(std::move(e));
  }

  if (c.command == "norms") {
    if (c.u.size() != 1 || c.u[0].empty())
      throw ConfigError("norms needs exactly one u = <expression>");
  }
  if (c.command == "norms" || c.command == "embed") {
    for (std::size_t i = 0; i < c.u.size(); ++i) {
      if (c.u[i].empty())
        throw ConfigError("u" + std::to_string(i + 1) + " is missing");
      FieldExpr e = detail::parse_field(c.u[i], "u" + std::to_string(i + 1));
      detail::check_var_range(e.max_var_index(), dim, "u" + std::to_string(i + 1));
      r.u_exprs.push_back(std::move(e));
    }
  }

  if (c.command == "embed") {
    if (c.family.empty()) c.family = r.u_exprs.empty() ? "trig" : "list";
    if (c.family == "list") {
      if (r.u_exprs.empty())
        throw ConfigError("family = list needs u expressions");
    } else if (c.family == "trig") {
      if (!r.u_exprs.empty())
        throw ConfigError("family = trig does not take u expressions");
      if (!c.seed)
        throw ConfigError("family = trig needs seed = <non-negative integer>");
    } else {
      throw ConfigError("family must be trig or list");
    }
  }

  // a sampled scan must be reproducible by construction, so it needs a seed
  if (c.pairs == "sampled" && !c.seed)
    throw ConfigError("pairs = sampled needs seed = <non-negative integer>");
  r.policy.seed = c.seed.value_or(0);
  return r;
}

// --- report helpers --------------------------------------------------------

namespace detail {

inline void write_header(JsonWriter& w, const RunConfig& c) {
  w.key("header").begin_object();
  w.key("tool").value(kToolName);
  w.key("version").value(kVersion);
  w.key("command").value(c.command);
  w.end_object();
}

inline void write_config(JsonWriter& w, const RunConfig& c) {
  w.key("config").begin_object();
  w.key("command").value(c.command);
  if (!c.box.empty()) {
    w.key("box").begin_array();
    for (double v : c.box) w.value(v);
    w.end_array();
  }
  if (!c.resolutions.empty()) {
    w.key("resolutions").begin_array();
    for (int v : c.resolutions) w.value(v);
    w.end_array();
  }
  if (!c.ladder.empty()) {
    w.key("ladder").begin_array();
    for (int v : c.ladder) w.value(v);
    w.end_array();
  }
  if (!c.predicate.empty()) w.key("predicate").value(c.predicate);
  if (!c.p.empty()) {
    w.key("p").begin_array();
    for (const auto& s : c.p) w.value(s);
    w.end_array();
  }
  if (!c.u.empty()) {
    w.key("u").begin_array();
    for (const auto& s : c.u) w.value(s);
    w.end_array();
  }
  if (!c.family.empty()) {
    w.key("family").value(c.family);
    if (c.family == "trig") {
      w.key("family_count").value(c.family_count);
      w.key("family_max_frequency").value(c.family_max_frequency);
      w.key("family_terms").value(c.family_terms);
      w.key("family_coeff_bound").value(c.family_coeff_bound);
    }
  }
  if (c.command != "expr-eval") {
    w.key("pairs").value(c.pairs);
    w.key("budget").value(c.budget);
    if (c.seed)
      w.key("seed").value(*c.seed);
    else
      w.key("seed").null();
    w.key("allow_hypothesis_violation").value(c.allow_hypothesis_violation);
    w.key("beta_literal_first").value(c.beta_literal_first);
  }
  if (!c.preset.empty()) w.key("preset").value(c.preset);
  if (c.command == "counterexample" && c.preset == "pronounced-cusp")
    w.key("alpha").value(c.alpha);
  if (!c.at.empty()) {
    w.key("at").begin_array();
    for (double v : c.at) w.value(v);
    w.end_array();
  }
  if (!c.expr.empty()) w.key("expr").value(c.expr);
  w.end_object();
}

inline void write_grid_info(JsonWriter& w, const Grid& g) {
  w.key("grid").begin_object();
  w.key("dimension").value(g.dim());
  w.key("resolutions").begin_array();
  for (int a = 0; a < g.dim(); ++a) w.value(g.resolution(a));
  w.end_array();
  w.key("active_cells").value(g.active_count());
  w.key("cell_volume").value(g.cell_volume());
  w.key("measure").value(g.measure());
  w.end_object();
}

inline void write_hypothesis(JsonWriter& w, const HypothesisReport& h) {
  w.key("hypothesis").begin_object();
  w.key("ok").value(h.ok());
  w.key("violating_cells").value(h.violating_cells);
  w.key("p_min").begin_array();
  for (double v : h.p_min) w.value(v);
  w.end_array();
  w.key("p_max").begin_array();
  for (double v : h.p_max) w.value(v);
  w.end_array();
  w.key("pointwise_min_inf").value(h.pointwise_min_inf);
  w.end_object();
}

inline void write_scan(JsonWriter& w, PairScanMode mode, std::uint64_t pairs,
                       std::uint64_t seed) {
  w.key("scan").begin_object();
  w.key("mode").value(mode == PairScanMode::Exhaustive ? "exhaustive"
                                                       : "sampled");
  w.key("pairs").value(pairs);
  if (mode == PairScanMode::Sampled)
    w.key("seed").value(seed);
  else
    w.key("seed").null();
  w.end_object();
}

inline void write_hoelder(JsonWriter& w, const HoelderResult& h) {
  w.key("hoelder").begin_object();
  w.key("seminorm").value(h.seminorm);
  w.key("sup").value(h.sup);
  w.key("norm").value(h.norm);
  w.key("argmax").begin_object();
  w.key("a").value(h.argmax_a);
  w.key("b").value(h.argmax_b);
  w.key("a_center").begin_array();
  for (double v : h.argmax_a_center) w.value(v);
  w.end_array();
  w.key("b_center").begin_array();
  for (double v : h.argmax_b_center) w.value(v);
  w.end_array();
  w.end_object();
  write_scan(w, h.mode_used, h.pairs_evaluated, h.seed);
  w.end_object();
}

inline std::string join_res(const std::vector<int>& res) {
  std::string s;
  for (std::size_t i = 0; i < res.size(); ++i)
    s += (i ? "x" : "") + std::to_string(res[i]);
  return s;
}

inline void write_survey_levels(JsonWriter& w, const SurveyReport& rep) {
  w.key("levels").begin_array();
  for (const auto& level : rep.levels) {
    w.begin_object();
    w.key("resolutions").begin_array();
    for (int v : level.resolutions) w.value(v);
    w.end_array();
    w.key("active_cells").value(level.active_cells);
    write_hypothesis(w, level.hypothesis);
    w.key("beta").begin_object();
    w.key("min").begin_array();
    for (double v : level.beta_min) w.value(v);
    w.end_array();
    w.key("max").begin_array();
    for (double v : level.beta_max) w.value(v);
    w.end_array();
    w.end_object();
    write_scan(w, level.mode_used, level.pairs_evaluated, level.seed);
    w.key("functions").begin_array();
    for (const auto& f : level.functions) {
      w.begin_object();
      w.key("index").value(f.index);
      w.key("source").value(f.source);
      w.key("sobolev").value(f.sobolev.value);
      w.key("sobolev_iterations").value(f.sobolev.iterations);
      w.key("sobolev_bracket_width").value(f.sobolev.bracket_width);
      w.key("hoelder_seminorm").value(f.hoelder.seminorm);
      w.key("hoelder_sup").value(f.hoelder.sup);
      w.key("hoelder_norm").value(f.hoelder.norm);
      w.key("ratio").value(f.ratio);
      w.end_object();
    }
    w.end_array();
    w.key("max_ratio").value(level.max_ratio);
    w.end_object();
  }
  w.end_array();
  w.key("overall_max_ratio").value(rep.overall_max_ratio);
}

inline void write_survey_csv(const SurveyReport& rep, std::ostream& os) {
  os << "level,function,sobolev,hoelder,ratio\n";
  for (std::size_t li = 0; li < rep.levels.size(); ++li) {
    for (const auto& f : rep.levels[li].functions) {
      os << li << "," << f.index << "," << format_double(f.sobolev.value)
         << "," << format_double(f.hoelder.norm) << ","
         << format_double(f.ratio) << "\n";
    }
  }
}

}  // namespace detail

// --- commands --------------------------------------------------------------

inline int cmd_expr_eval(const ResolvedRun& r, std::ostream& os) {
  const double v = r.eval_expr.eval(
      std::span<const double>(r.cfg.at.data(), r.cfg.at.size()));
  if (r.cfg.format == "csv") {
    os << "value\n" << format_double(v) << "\n";
    return 0;
  }
  JsonWriter w(os);
  w.begin_object();
  detail::write_header(w, r.cfg);
  detail::write_config(w, r.cfg);
  w.key("value").value(v);
  w.end_object();
  w.finish();
  return 0;
}

inline int cmd_beta(const ResolvedRun& r, std::ostream& os,
                    std::ostream* field_csv) {
  GridPtr grid = Grid::build(r.box, r.levels.front(),
                             r.predicate.valid() ? &r.predicate : nullptr);
  ExponentVectorField p = ExponentVectorField::sample(grid, r.p_exprs);
  const HypothesisReport hyp = validate_hypotheses(p);
  BetaField beta = beta_exponents(p, r.beta);
  const GridFunction pbar = harmonic_mean(p);
  const CriticalExponentField crit = critical_exponent(pbar, grid->dim());

  if (field_csv) write_beta_csv(beta, *field_csv);
  if (r.cfg.format == "csv") {
    write_beta_csv(beta, os);
    return 0;
  }

  JsonWriter w(os);
  w.begin_object();
  detail::write_header(w, r.cfg);
  detail::write_config(w, r.cfg);
  detail::write_grid_info(w, *grid);
  detail::write_hypothesis(w, hyp);
  w.key("beta").begin_object();
  w.key("min").begin_array();
  for (int a = 0; a < beta.directions(); ++a) w.value(beta.direction_min(a));
  w.end_array();
  w.key("max").begin_array();
  for (int a = 0; a < beta.directions(); ++a) w.value(beta.direction_max(a));
  w.end_array();
  w.end_object();
  {
    double lo = pbar[0], hi = pbar[0];
    for (std::size_t k = 1; k < pbar.size(); ++k) {
      lo = std::min(lo, pbar[k]);
      hi = std::max(hi, pbar[k]);
    }
    w.key("harmonic_mean").begin_object();
    w.key("min").value(lo);
    w.key("max").value(hi);
    w.end_object();
  }
  w.key("critical_exponent").begin_object();
  w.key("finite_cells").value(crit.finite_count());
  w.key("infinite_cells").value(crit.size() - crit.finite_count());
  w.end_object();
  w.key("log_modulus").begin_array();
  for (int a = 0; a < p.directions(); ++a) {
    const LogModulusResult lm =
        log_modulus(p.field(a), r.policy.pair_budget, r.policy.seed);
    w.begin_object();
    w.key("direction").value(a + 1);
    w.key("value").value(lm.value);
    w.key("pairs").value(lm.pairs_evaluated);
    w.key("exhaustive").value(lm.exhaustive);
    w.key("no_valid_pairs").value(lm.no_valid_pairs);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  w.finish();
  return 0;
}

inline int cmd_norms(const ResolvedRun& r, std::ostream& os,
                     std::ostream* pairs_csv) {
  GridPtr grid = Grid::build(r.box, r.levels.front(),
                             r.predicate.valid() ? &r.predicate : nullptr);
  ExponentVectorField p = ExponentVectorField::sample(grid, r.p_exprs);
  const HypothesisReport hyp = validate_hypotheses(p);
  if (!hyp.ok() && !r.cfg.allow_hypothesis_violation)
    throw HypothesisError(hyp.violating_cells);
  BetaField beta = beta_exponents(p, r.beta);
  GridFunction u = GridFunction::sample(grid, r.u_exprs.front());
  const NormResult sob = sobolev_norm(u, p);
  const HoelderResult hoe = hoelder_norm(u, beta, r.policy);
  const double ratio = hoe.norm / sob.value;

  if (pairs_csv) write_pair_quotients_csv(u, beta, r.policy, *pairs_csv);
  if (r.cfg.format == "csv") {
    os << "sobolev,hoelder_seminorm,hoelder_sup,hoelder_norm,ratio\n"
       << format_double(sob.value) << "," << format_double(hoe.seminorm) << ","
       << format_double(hoe.sup) << "," << format_double(hoe.norm) << ","
       << format_double(ratio) << "\n";
    return 0;
  }

  JsonWriter w(os);
  w.begin_object();
  detail::write_header(w, r.cfg);
  detail::write_config(w, r.cfg);
  detail::write_grid_info(w, *grid);
  detail::write_hypothesis(w, hyp);
  w.key("sobolev").begin_object();
  w.key("value").value(sob.value);
  w.key("iterations").value(sob.iterations);
  w.key("bracket_width").value(sob.bracket_width);
  w.end_object();
  detail::write_hoelder(w, hoe);
  w.key("ratio").value(ratio);
  w.end_object();
  w.finish();
  return 0;
}

inline int cmd_embed(const ResolvedRun& r, std::ostream& os) {
  SurveySetup setup;
  setup.box = r.box;
  setup.predicate = r.predicate;
  setup.p_exprs = r.p_exprs;
  setup.beta = r.beta;
  setup.policy = r.policy;
  setup.allow_hypothesis_violation = r.cfg.allow_hypothesis_violation;
  FunctionFamily fam =
      r.cfg.family == "trig"
          ? FunctionFamily::trig(
                TrigFamilySpec{r.cfg.family_count, r.cfg.family_max_frequency,
                               r.cfg.family_terms, r.cfg.family_coeff_bound,
                               r.cfg.seed.value_or(0)},
                r.dim)
          : FunctionFamily::list(r.u_exprs);
  const SurveyReport rep = embedding_survey(setup, fam, r.levels);

  if (r.cfg.format == "csv") {
    detail::write_survey_csv(rep, os);
    return 0;
  }
  JsonWriter w(os);
  w.begin_object();
  detail::write_header(w, r.cfg);
  detail::write_config(w, r.cfg);
  detail::write_survey_levels(w, rep);
  w.end_object();
  w.finish();
  return 0;
}

inline int cmd_counterexample(const ResolvedRun& r, std::ostream& os) {
  CuspSpec spec = r.cfg.preset == "mild-cusp"
                      ? mild_cusp_preset()
                      : pronounced_cusp_preset(r.cfg.alpha);
  const CuspReport rep = counterexample_run(spec, r.levels, r.policy);

  if (r.cfg.format == "csv") {
    os << "level,resolution,max_quotient,growth_factor,sobolev_norm,"
          "argmax_distance\n";
    for (std::size_t i = 0; i < rep.levels.size(); ++i) {
      const auto& level = rep.levels[i];
      os << i << "," << detail::join_res(level.resolutions) << ","
         << format_double(level.max_quotient) << ",";
      if (i > 0 && std::isfinite(rep.quotient_growth[i - 1]))
        os << format_double(rep.quotient_growth[i - 1]);
      os << ",";
      if (level.sobolev_ok) os << format_double(level.sobolev);
      os << ",";
      if (std::isfinite(level.argmax_distance))
        os << format_double(level.argmax_distance);
      os << "\n";
    }
    return 0;
  }

  JsonWriter w(os);
  w.begin_object();
  detail::write_header(w, r.cfg);
  detail::write_config(w, r.cfg);
  w.key("skipped_levels").begin_array();
  for (const auto& res : rep.skipped) {
    w.begin_array();
    for (int v : res) w.value(v);
    w.end_array();
  }
  w.end_array();
  w.key("levels").begin_array();
  for (const auto& level : rep.levels) {
    w.begin_object();
    w.key("resolutions").begin_array();
    for (int v : level.resolutions) w.value(v);
    w.end_array();
    w.key("active_cells").value(level.active_cells);
    w.key("violating_cells").value(level.violating_cells);
    w.key("max_quotient").value(level.max_quotient);
    w.key("argmax").begin_object();
    w.key("a").value(level.argmax_a);
    w.key("b").value(level.argmax_b);
    w.key("a_center").begin_array();
    for (double v : level.argmax_a_center) w.value(v);
    w.end_array();
    w.key("b_center").begin_array();
    for (double v : level.argmax_b_center) w.value(v);
    w.end_array();
    w.end_object();
    detail::write_scan(w, level.mode_used, level.pairs_evaluated,
                       r.policy.seed);
    if (level.sobolev_ok) {
      w.key("sobolev").value(level.sobolev);
    } else {
      w.key("sobolev").null();
      w.key("sobolev_error").value(level.sobolev_error);
    }
    w.key("argmax_distance").value(level.argmax_distance);
    w.end_object();
  }
  w.end_array();
  w.key("quotient_growth").begin_array();
  for (double v : rep.quotient_growth) w.value(v);
  w.end_array();
  w.end_object();
  w.finish();
  return 0;
}

inline int cmd_app(const ResolvedRun& r, std::ostream& os) {
  const SurveyReport rep =
      run_application_preset(r.cfg.preset, r.levels.front(), r.policy,
                             r.cfg.allow_hypothesis_violation);
  if (r.cfg.format == "csv") {
    detail::write_survey_csv(rep, os);
    return 0;
  }
  JsonWriter w(os);
  w.begin_object();
  detail::write_header(w, r.cfg);
  detail::write_config(w, r.cfg);
  detail::write_survey_levels(w, rep);
  w.end_object();
  w.finish();
  return 0;
}

// Validates, dispatches, writes the report (to cfg.out when set, else to
// `fallback_out`), and maps failures onto exit codes.
inline int run_command(const RunConfig& cfg, std::ostream& fallback_out,
                       std::ostream& err) {
  try {
    ResolvedRun r = resolve(cfg);

    std::ofstream out_file;
    std::ostream* os = &fallback_out;
    if (!r.cfg.out.empty()) {
      out_file.open(r.cfg.out);
      if (!out_file)
        throw ConfigError("cannot open output file \"" + r.cfg.out + "\"");
      os = &out_file;
    }
    std::ofstream field_file, pairs_file;
    std::ostream* field_csv = nullptr;
    std::ostream* pairs_csv = nullptr;
    if (!r.cfg.field_csv.empty()) {
      field_file.open(r.cfg.field_csv);
      if (!field_file)
        throw ConfigError("cannot open field CSV \"" + r.cfg.field_csv + "\"");
      field_csv = &field_file;
    }
    if (!r.cfg.pairs_csv.empty()) {
      pairs_file.open(r.cfg.pairs_csv);
      if (!pairs_file)
        throw ConfigError("cannot open pair CSV \"" + r.cfg.pairs_csv + "\"");
      pairs_csv = &pairs_file;
    }

    if (r.cfg.command == "expr-eval") return cmd_expr_eval(r, *os);
    if (r.cfg.command == "beta") return cmd_beta(r, *os, field_csv);
    if (r.cfg.command == "norms") return cmd_norms(r, *os, pairs_csv);
    if (r.cfg.command == "embed") return cmd_embed(r, *os);
    if (r.cfg.command == "counterexample") return cmd_counterexample(r, *os);
    if (r.cfg.command == "app") return cmd_app(r, *os);
    throw ConfigError("unknown command \"" + r.cfg.command + "\"");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    err << "syntax error: " << e.what() << "\n";
    return 2;
  } catch (const UnknownIdentifierError& e) {
    err << "syntax error: " << e.what() << "\n";
    return 2;
  } catch (const HypothesisError& e) {
    err << "hypothesis violation: " << e.what()
        << " (pass allow_hypothesis_violation to proceed)\n";
    return 4;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace holderlab
