#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "symdyn/error.hpp"
#include "symdyn/report.hpp"

using namespace symdyn;
namespace fs = std::filesystem;

namespace {

const char* kGolden = R"({"symbols": ["a", "b"], "edges": [["a", "a"], ["a", "b"], ["b", "a"]]})";
const char* kFull = R"({"symbols": ["a", "b"], "edges": [["a", "a"], ["a", "b"], ["b", "a"], ["b", "b"]]})";
const char* kStranded = R"({"symbols": ["a", "b", "c"], "edges": [["a", "a"], ["a", "b"], ["b", "a"]]})";

CommandOptions options(const std::string& command, const std::string& spec) {
  CommandOptions o;
  o.command = command;
  o.spec_text = spec;
  return o;
}

const Check* find_check(const RunReport& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("symdyn_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
};

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const Scratch& s, const std::string& args) {
  const auto out = s.dir / "stdout.txt", err = s.dir / "stderr.txt";
  const std::string cmd = std::string(SYMDYN_CLI_PATH) + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("pressure reports") {
  auto g = run_command(options("pressure", kGolden));
  CHECK(g.passed());
  CHECK(g.results["pressure"].get<double>() == doctest::Approx(std::log((1.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-12));
  auto f = run_command(options("pressure", kFull));
  CHECK(f.results["pressure"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(f.inputs_digest.size() == 64);
  CHECK(f.inputs_digest != g.inputs_digest);
}

TEST_CASE("digest") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("reduce on a constant potential has no transfer function") {
  auto o = options("reduce", kFull);
  o.potential_text = R"({"past_window": 0, "future_window": 1, "values": {}, "default": 0.7})";
  auto r = run_command(o);
  CHECK(r.passed());
  CHECK(r.results["past_window"] == 1);
  CHECK(r.results["future_window"] == 0);
  for (const auto& [k, v] : r.results["transfer"].items()) CHECK(std::abs(v.get<double>()) < 1e-15);
  CHECK(r.results["transfer_sup_norm"].get<double>() < 1e-15);
  for (const auto& [k, v] : r.results["past_potential"].items()) CHECK(v.get<double>() == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("equilibrium on the full 2-shift is Bernoulli") {
  auto o = options("equilibrium", kFull);
  o.depth = 6;
  auto r = run_command(o);
  CHECK(r.passed());
  const auto& cyl = r.results["components"][0]["cylinders"];
  CHECK(cyl.size() > 0);
  for (const auto& [k, v] : cyl.items()) {
    const int n = std::stoi(k.substr(0, k.find(':')));
    CHECK(v.get<double>() == doctest::Approx(std::ldexp(1.0, -n)).epsilon(1e-12));
  }
}

TEST_CASE("leaf on the golden mean") {
  auto o = options("leaf", kGolden);
  o.stem = "ba";
  o.depth = 4;
  auto r = run_command(o);
  CHECK(r.passed());
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  // psi(a) times the Doob product along aab.
  const double total = r.results["total"].get<double>();
  CHECK(r.results["masses"]["aab"].get<double>() == doctest::Approx(total / (phi * phi * phi)).epsilon(1e-12));

  o.stem = "bb";
  try {
    run_command(o);
    FAIL("expected an inadmissible stem to be rejected");
  } catch (const Error& e) {
    CHECK(e.kind() != ErrorKind::NoConvergence);
  }
}

TEST_CASE("verify passes on standard inputs and is deterministic") {
  auto a = run_command(options("verify", kGolden));
  CHECK(a.passed());
  CHECK(a.all_finite());
  for (const auto& c : a.checks) CHECK_MESSAGE(c.status != "fail", c.name);
  CHECK(find_check(a, "component[0].pressure_base_independent") != nullptr);
  auto b = run_command(options("verify", kGolden));
  CHECK(a.to_json(false).dump() == b.to_json(false).dump());
  CHECK(!a.to_json(false).contains("timing"));
  CHECK(a.to_json(true).contains("timing"));

  auto o = options("verify", kFull);
  o.potential_text = R"({"past_window": 1, "future_window": 1, "values": {"aba": 0.4, "bab": -0.3, "abb": 0.2}, "default": 0.0})";
  auto f = run_command(o);
  CHECK(f.passed());
}

TEST_CASE("catmap demo") {
  auto o = options("catmap-demo", "");
  o.depth = 10;
  auto r = run_command(o);
  CHECK(r.passed());
  CHECK(r.results["srb_max_relative_deviation"].get<double>() < 1e-8);
  o.t = 3.0;
  CHECK_THROWS_AS(run_command(o), Error);
}

TEST_CASE("command-line exit codes") {
  Scratch s;
  const auto golden = s.write("golden.json", kGolden);
  const auto stranded = s.write("stranded.json", kStranded);
  const auto broken = s.write("broken.json", "{\"symbols\": [\"a\",\n \"b\"], \"edges\": [[\"a\", \"z\"]]}");
  const auto bad_pot = s.write("pot.json", R"({"past_window": 0, "future_window": 0, "values": {"ab": 1.0}})");

  auto ok = run_cli(s, "pressure --spec " + golden);
  CHECK(ok.code == 0);
  auto report = nlohmann::json::parse(ok.out);
  CHECK(report["command"] == "pressure");
  CHECK(report["results"]["pressure"].get<double>() == doctest::Approx(0.48121182505956).epsilon(1e-12));

  auto str = run_cli(s, "pressure --spec " + stranded);
  CHECK(str.code == 2);
  CHECK(str.err.find("StrandedSymbol") != std::string::npos);

  auto br = run_cli(s, "pressure --spec " + broken);
  CHECK(br.code == 2);
  CHECK(br.err.find(broken + ":") != std::string::npos);

  CHECK(run_cli(s, "pressure --spec " + golden + " --potential " + bad_pot).code == 2);
  CHECK(run_cli(s, "leaf --spec " + golden + " --stem bb").code == 2);
  CHECK(run_cli(s, "pressure").code == 2);
  CHECK(run_cli(s, "pressure --spec " + golden + " --depth 0").code == 2);
  CHECK(run_cli(s, "frobnicate --spec " + golden).code == 2);

  const auto out = (s.dir / "verify.json").string();
  CHECK(run_cli(s, "verify --spec " + golden + " --out " + out).code == 0);
  std::ifstream in(out);
  auto v = nlohmann::json::parse(in);
  CHECK(v["command"] == "verify");
  CHECK(v["results"]["failed"] == 0);
}
