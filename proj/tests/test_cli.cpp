#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const std::string& bin() {
  static const std::string path = [] {
    const char* p = std::getenv("HOLDERLAB_BIN");
    REQUIRE(p != nullptr);
    return std::string(p);
  }();
  return path;
}

std::string scratch_dir() {
  static const std::string dir = [] {
    std::string tmpl = "/tmp/holderlab_cli_XXXXXX";
    char* d = mkdtemp(tmpl.data());
    REQUIRE(d != nullptr);
    return std::string(d);
  }();
  return dir;
}

RunResult run(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const std::string base = scratch_dir() + "/run" + std::to_string(counter++);
  const std::string cmd = env + (env.empty() ? "" : " ") + bin() + " " + args +
                          " >" + base + ".out 2>" + base + ".err";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(base + ".out");
  r.err = slurp(base + ".err");
  return r;
}

}  // namespace

TEST_CASE("expr-eval end to end", "[cli]") {
  const auto r = run("expr-eval --expr \"2+3*4\" --at 0");
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  REQUIRE(doc["value"].get<double>() == 14.0);
  REQUIRE(doc["header"]["tool"] == "holderlab");
  REQUIRE(doc["header"]["command"] == "expr-eval");

  const auto power = run("expr-eval --expr \"2^3^2\" --at 0");
  REQUIRE(json::parse(power.out)["value"].get<double>() == 512.0);

  const auto multi = run("expr-eval --expr \"x1+10*x2\" --at 2,3");
  REQUIRE(json::parse(multi.out)["value"].get<double>() == 32.0);

  const auto csv = run("expr-eval --expr \"1+1\" --at 0 --format csv");
  REQUIRE(csv.exit_code == 0);
  REQUIRE(csv.out == "value\n2\n");
}

TEST_CASE("syntax problems exit with status 2", "[cli]") {
  const auto r = run("expr-eval --expr \"2+\" --at 0");
  REQUIRE(r.exit_code == 2);
  REQUIRE(r.err.find("syntax error") != std::string::npos);
  REQUIRE(r.out.empty());

  const auto unknown = run("expr-eval --expr \"frob(2)\" --at 0");
  REQUIRE(unknown.exit_code == 2);
  REQUIRE(unknown.err.find("frob") != std::string::npos);

  const auto badvar = run(
      "norms --box 0,1,0,1 --resolutions 8 --p 4 --u x3 --pairs exhaustive");
  REQUIRE(badvar.exit_code == 2);
  REQUIRE(badvar.err.find("x3") != std::string::npos);

  const auto badflag = run("norms --frobnicate");
  REQUIRE(badflag.exit_code == 2);

  const auto nocmd = run("--box 0,1");
  REQUIRE(nocmd.exit_code == 2);

  const auto badcfg = run("beta --config /nonexistent/path.cfg");
  REQUIRE(badcfg.exit_code == 2);
}

TEST_CASE("computation failures exit with status 3", "[cli]") {
  // sampling sqrt of a negative number fails at evaluation time
  const auto r = run(
      "norms --box -1,1,0,1 --resolutions 8 --p 4 --u \"sqrt(x1)\" "
      "--pairs exhaustive");
  REQUIRE(r.exit_code == 3);
  REQUIRE_FALSE(r.err.empty());
}

TEST_CASE("norms report is internally consistent", "[cli]") {
  const auto r = run(
      "norms --box 0,1,0,1 --resolutions 16 --p \"2+x1\" --p 3 "
      "--u \"sin(pi*x1)*x2\" --pairs exhaustive");
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  const double sob = doc["sobolev"]["value"].get<double>();
  const double norm = doc["hoelder"]["norm"].get<double>();
  const double sup = doc["hoelder"]["sup"].get<double>();
  const double semi = doc["hoelder"]["seminorm"].get<double>();
  REQUIRE(sob > 0.0);
  REQUIRE(norm == sup + semi);
  REQUIRE(doc["ratio"].get<double>() == norm / sob);
  REQUIRE(doc["hoelder"]["scan"]["mode"] == "exhaustive");
  REQUIRE(doc["hoelder"]["scan"]["seed"].is_null());
  REQUIRE(doc["grid"]["active_cells"].get<int>() == 256);
  REQUIRE(doc["hypothesis"]["ok"].get<bool>());

  // the echoed config omits plumbing keys
  REQUIRE_FALSE(doc["config"].contains("out"));
  REQUIRE_FALSE(doc["config"].contains("format"));
  REQUIRE_FALSE(doc["config"].contains("threads"));
}

TEST_CASE("norms csv format", "[cli]") {
  const auto r = run(
      "norms --box 0,1,0,1 --resolutions 8 --p 4 --u x1 --pairs exhaustive "
      "--format csv");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("sobolev,hoelder_seminorm,hoelder_sup,hoelder_norm,ratio\n",
                      0) == 0);
  // header line plus one data line
  REQUIRE(std::count(r.out.begin(), r.out.end(), '\n') == 2);
}

TEST_CASE("config files load and flags override them", "[cli]") {
  const std::string cfg_path = scratch_dir() + "/norms.cfg";
  {
    std::ofstream f(cfg_path);
    f << "command = norms\n"
         "box = 0, 1, 0, 1\n"
         "resolutions = 8\n"
         "p = 4\n"
         "u = x1*x2\n"
         "pairs = exhaustive\n";
  }
  const auto from_cfg = run("--config " + cfg_path);
  REQUIRE(from_cfg.exit_code == 0);
  const auto from_flags = run(
      "norms --box 0,1,0,1 --resolutions 8 --p 4 --u \"x1*x2\" "
      "--pairs exhaustive");
  REQUIRE(from_cfg.out == from_flags.out);

  // a flag wins over the file
  const auto overridden = run("--config " + cfg_path + " --resolutions 16");
  REQUIRE(overridden.exit_code == 0);
  const auto doc = json::parse(overridden.out);
  REQUIRE(doc["grid"]["resolutions"][0].get<int>() == 16);
  REQUIRE(doc["grid"]["active_cells"].get<int>() == 256);
}

TEST_CASE("hypothesis gating maps to exit 4", "[cli]") {
  const auto heat = run("app --preset heat --resolutions 16");
  REQUIRE(heat.exit_code == 4);
  REQUIRE(heat.err.find("hypothesis violation") != std::string::npos);
  REQUIRE(heat.err.find("allow_hypothesis_violation") != std::string::npos);

  const auto allowed =
      run("app --preset heat --resolutions 16 --allow-hypothesis-violation");
  REQUIRE(allowed.exit_code == 0);
  const auto doc = json::parse(allowed.out);
  const auto& level = doc["levels"][0];
  REQUIRE_FALSE(level["hypothesis"]["ok"].get<bool>());
  REQUIRE(level["hypothesis"]["violating_cells"].get<int>() > 0);

  const auto porous = run("app --preset porous --resolutions 16");
  REQUIRE(porous.exit_code == 0);
  const auto pd = json::parse(porous.out);
  REQUIRE(pd["levels"][0]["hypothesis"]["violating_cells"].get<int>() == 0);
}

TEST_CASE("beta command reports fields and diagnostics", "[cli]") {
  const auto r = run(
      "beta --box 0,1,0,1 --resolutions 8 --p 4 --p 8 --pairs exhaustive");
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  REQUIRE(doc["beta"]["min"][0].get<double>() == 5.0 / 9.0);
  REQUIRE(doc["beta"]["max"][1].get<double>() == 5.0 / 7.0);
  REQUIRE(doc["harmonic_mean"]["min"].get<double>() == 16.0 / 3.0);
  REQUIRE(doc["critical_exponent"]["finite_cells"].get<int>() == 0);
  REQUIRE(doc["critical_exponent"]["infinite_cells"].get<int>() == 64);
  REQUIRE(doc["log_modulus"].is_array());
  REQUIRE(doc["log_modulus"].size() == 2);

  // beta never gates on hypotheses, even when they fail
  const auto low = run(
      "beta --box 0,1,0,1 --resolutions 8 --p 1.5 --pairs exhaustive");
  REQUIRE(low.exit_code == 0);
  const auto lowdoc = json::parse(low.out);
  REQUIRE_FALSE(lowdoc["hypothesis"]["ok"].get<bool>());
}

TEST_CASE("beta csv outputs", "[cli]") {
  const std::string side = scratch_dir() + "/beta_field.csv";
  const auto r = run(
      "beta --box 0,1,0,1 --resolutions 4 --p 4 --pairs exhaustive "
      "--format csv --field-csv " + side);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.rfind("i1,i2,x1,x2,beta_1,beta_2\n", 0) == 0);
  REQUIRE(std::count(r.out.begin(), r.out.end(), '\n') == 17);  // header + 16
  REQUIRE(slurp(side) == r.out);  // the side dump is the same field table
}

TEST_CASE("pair quotient side dump", "[cli]") {
  const std::string side = scratch_dir() + "/pairs.csv";
  const auto r = run(
      "norms --box 0,1 --resolutions 16 --p 3 --u \"x1^2\" --pairs exhaustive "
      "--pairs-csv " + side);
  REQUIRE(r.exit_code == 0);
  const std::string text = slurp(side);
  REQUIRE(text.rfind("a_index,b_index,quotient\n", 0) == 0);
  REQUIRE(std::count(text.begin(), text.end(), '\n') == 1 + 16 * 15 / 2);
}

TEST_CASE("--out redirects the report", "[cli]") {
  const std::string path = scratch_dir() + "/report.json";
  const auto r = run("expr-eval --expr 7 --at 0 --out " + path);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.empty());
  REQUIRE(json::parse(slurp(path))["value"].get<double>() == 7.0);
}

TEST_CASE("counterexample command emits a ladder", "[cli]") {
  const auto r = run("counterexample --preset mild-cusp --ladder 16,32");
  REQUIRE(r.exit_code == 0);
  const auto doc = json::parse(r.out);
  REQUIRE(doc["levels"].size() == 2);
  REQUIRE(doc["quotient_growth"].size() == 1);
  for (const auto& level : doc["levels"]) {
    REQUIRE(level["max_quotient"].get<double>() > 0.0);
    REQUIRE(level["violating_cells"].get<int>() == 0);
  }
  const auto csv = run(
      "counterexample --preset mild-cusp --ladder 16,32 --format csv");
  REQUIRE(csv.exit_code == 0);
  REQUIRE(csv.out.rfind("level,resolution,max_quotient,growth_factor,"
                        "sobolev_norm,argmax_distance\n",
                        0) == 0);
}

TEST_CASE("thread count does not change any bytes", "[cli]") {
  const std::string args =
      "embed --box 0,1,0,3 --ladder 12,24 --p \"4-0.1*x1\" --p \"3+0.2*x2\" "
      "--family trig --family-count 3 --seed 11 --budget 4000";
  const auto t1 = run(args, "HOLDERLAB_THREADS=1");
  const auto t4 = run(args, "HOLDERLAB_THREADS=4");
  REQUIRE(t1.exit_code == 0);
  REQUIRE(t4.exit_code == 0);
  REQUIRE(t1.out == t4.out);
  REQUIRE_FALSE(t1.out.empty());

  // --threads is the same knob
  const auto tf = run(args + " --threads 4");
  REQUIRE(tf.out == t1.out);
}

TEST_CASE("version and help", "[cli]") {
  const auto v = run("--version");
  REQUIRE(v.exit_code == 0);
  REQUIRE(v.out.find("holderlab") != std::string::npos);
  const auto h = run("--help");
  REQUIRE(h.exit_code == 0);
  REQUIRE(h.out.find("norms") != std::string::npos);
}
