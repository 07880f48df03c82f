#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "experiment.hpp"

using namespace liblab;
using namespace liblab::cli;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "liblab");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("liblab_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cell(line);
    std::string c;
    while (std::getline(cell, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("spec round trip") {
  ExperimentSpec spec;
  spec.command = Command::oracle_mc;
  spec.tau_p = 0.3;
  spec.tau_q = 0.1 + 0.2;  // not exactly representable in decimal
  spec.measure = {{"atoms", {{"zero", 0.125}}}, {"density", {{"kind", "named"}, {"name", "bump"}}}};
  spec.times = {0.0, 1.0 / 3.0, 2.5};
  spec.grid = 1024;
  spec.t_max = 32.0;
  spec.tol = 1e-7;
  spec.seed = 0xfedcba9876543210ULL;
  spec.n = 120;
  spec.samples = 3;
  spec.dt = 5e-3;
  spec.initial = "aligned";
  spec.moments = 12;
  spec.out = "x.csv";
  spec.format = Format::csv;
  CHECK(spec_from_json(to_json(spec)) == spec);
  CHECK(parse_spec(to_json(spec).dump()) == spec);
  CHECK(parse_spec(to_json(ExperimentSpec{}).dump(2)) == ExperimentSpec{});
}

TEST_CASE("spec validation") {
  const std::string unknown = "{\n  \"command\": \"chiorb\",\n  \"tau_pp\": 0.5\n}\n";
  try {
    parse_spec(unknown);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
  }
  try {
    parse_spec("{\n  \"tau_p\": 0.5,,\n}");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_spec("{\"grid\": \"big\"}"), ValidationError);
  CHECK_THROWS_AS(parse_spec("{\"command\": \"plot\"}"), ValidationError);
  CHECK_THROWS_AS(parse_spec("[1, 2]"), ValidationError);

  const std::string bad_tau = "{\n\"command\": \"chiorb\",\n  \"tau_p\": 1.5\n}";
  try {
    validate(parse_spec(bad_tau), bad_tau);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.line() == 3);
  }
  ExperimentSpec s;
  s.measure = {{"density", {{"kind", "named"}, {"name", "nope"}}}};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ExperimentSpec{};
  s.measure = {{"atoms", {{"zero", 0.25}}}};  // mass 1/4, needs 1/2
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ExperimentSpec{};
  s.command = Command::moments;
  s.tau_q = 0.6;
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = ExperimentSpec{};
  s.command = Command::oracle_mc;
  s.times = {0.015};
  CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("measure specs") {
  const TraceParams h = TraceParams::half();
  const CircleMeasure haar = build_measure({{"density", {{"kind", "named"}, {"name", "haar_half"}}}}, h, 256);
  CHECK(haar.density()(7) == doctest::Approx(0.25 / M_PI).epsilon(1e-15));
  const CircleMeasure delta = build_measure({{"density", {{"kind", "named"}, {"name", "delta_zero"}}}}, h, 256);
  CHECK(delta.atom_zero() == 0.5);
  const std::vector<double> values(64, 0.25 / M_PI);
  const CircleMeasure samples =
      build_measure({{"atoms", {{"pi", 0.0}}}, {"density", {{"kind", "samples"}, {"values", values}}}}, h, 256);
  CHECK(samples.grid_size() == 64);
  CHECK(std::abs(samples.total_mass() - 0.5) < 1e-14);
  const TraceParams p(0.5, 0.6);
  for (const char* name : {"haar_half", "free_projections", "delta_zero", "cosine", "bump"}) {
    const CircleMeasure mu = build_measure({{"density", {{"kind", "named"}, {"name", name}}}}, p, 1024);
    CHECK(std::abs(mu.total_mass() - p.interior_mass()) < 1e-9);
  }
  CHECK_THROWS(build_measure({{"density", {{"kind", "samples"}, {"values", std::vector<double>(3, 0.1)}}}}, h, 256));
  CHECK_THROWS(build_measure({{"weights", 1}}, h, 256));
}

TEST_CASE("hash") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("verify on the free pair") {
  const Outcome r = run_cli({"verify", "--preset", "haar_half"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(std::abs(j["result"]["i_star"].get<double>()) < 1e-6);
  CHECK(std::abs(j["result"]["chi_orb"].get<double>()) < 1e-6);
  CHECK(j["result"]["gap"].get<double>() < 1e-6);
  CHECK(j["provenance"]["spec_hash"].get<std::string>().size() == 16);
  CHECK(j["provenance"]["flow"].contains("branch_ambiguities"));
  CHECK(j["provenance"]["flow"].contains("characteristic_drops"));
}

TEST_CASE("chiorb of free projections") {
  const Outcome r = run_cli({"chiorb", "--preset", "free_projections", "--tauP", "0.5", "--tauQ", "0.6"});
  REQUIRE(r.code == 0);
  CHECK(std::abs(json::parse(r.out)["result"]["chi_orb"].get<double>()) < 1e-6);
  const Outcome inf = run_cli({"chiorb", "--preset", "delta_zero"});
  REQUIRE(inf.code == 0);
  CHECK(json::parse(inf.out)["result"]["chi_orb"] == "-inf");
}

TEST_CASE("evolve to csv") {
  const std::string path = temp_path("m.csv");
  const Outcome r = run_cli({"evolve", "--preset", "delta_zero", "--t", "1", "--out", path});
  REQUIRE(r.code == 0);
  const std::string first = slurp(path);
  const auto rows = csv_rows(first);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0][0] == "t");
  CHECK(rows[0][3] == "c1");
  CHECK(std::abs(std::stod(rows[1][3]) - std::exp(-1.0)) < 1e-5);
  // Re-running overwrites with identical bytes.
  REQUIRE(run_cli({"evolve", "--preset", "delta_zero", "--t", "1", "--out", path}).code == 0);
  CHECK(slurp(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("json reports are reproducible apart from the timestamp") {
  auto payload = [] {
    json j = json::parse(run_cli({"moments", "--preset", "delta_zero", "--t", "0.5", "1", "--grid", "1024"}).out);
    j["provenance"].erase("timestamp");
    return j;
  };
  const json a = payload();
  CHECK(a == payload());
  CHECK(a["result"]["max_difference"].get<double>() < 1e-5);
}

TEST_CASE("config file with overrides") {
  const std::string path = temp_path("spec.json");
  {
    std::ofstream f(path);
    f << R"({"command": "oracle-mc", "n": 40, "samples": 2, "initial": "aligned", "times": [0, 0.1], "grid": 512})";
  }
  const Outcome r = run_cli({"--config", path, "--format", "json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["result"]["snapshots"][0]["ks"].get<double>() == 0.0);
  CHECK(j["result"]["unitarity_drift"].get<double>() < 1e-10);
  const Outcome csv = run_cli({"--config", path, "--format", "csv", "--seed", "3"});
  REQUIRE(csv.code == 0);
  CHECK(csv_rows(csv.out).size() == 1 + 2 * 2 * 40);
  std::remove(path.c_str());
}

TEST_CASE("pde check") {
  const Outcome r = run_cli({"pde-check", "--preset", "cosine", "--t", "0.5", "--grid", "1024"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out)["result"];
  CHECK(j["residual_max"].get<double>() < 1e-4);
  CHECK(j["ratio"].get<double>() == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("exit codes") {
  CHECK(run_cli({"chiorb", "--tauP", "1.5"}).code == 1);
  CHECK(run_cli({"chiorb", "--bogus"}).code == 1);
  CHECK(run_cli({"plot"}).code == 1);
  CHECK(run_cli({}).code == 1);
  const Outcome bad = run_cli({"evolve", "--preset", "haar_half", "--t", "1e9", "--grid", "256"});
  CHECK(bad.code == 2);
  const json detail = json::parse(bad.err);
  CHECK(detail["error"] == "NewtonDivergence");
  CHECK(detail["spec"]["times"][0].get<double>() == 1e9);
}
