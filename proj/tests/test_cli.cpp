#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "cli.hpp"
#include "delayshare/coordinator.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/evaluate.hpp"
#include "delayshare/instances.hpp"
#include "delayshare/io.hpp"
#include "delayshare/second_form.hpp"
#include "fixtures.hpp"

using namespace delayshare;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("delayshare_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("solve on a one-state file prints the sum of stage minima") {
  TempDir dir;
  ProblemSpec s = fixtures::single_state(2, 3, 1, 0.0);
  s.u_size = {3, 1};
  for (int t = 0; t < 3; ++t) {
    s.trans[t][0] = {Vec{1.0}, Vec{1.0}, Vec{1.0}};
    s.cost[t][0] = {4.0 - t, 2.5 + t, 9.0};
  }
  // min per stage: 2.5, 3, 2
  const std::string p = dir.write("one.json", serialize_problem(s));
  Run r = run({"solve", "--problem", p});
  CHECK(r.code == 0);
  CHECK(r.out.find("optimal_cost 7.5\n") == 0);
  Run r2 = run({"solve2", "--problem", p});
  CHECK(r2.out.find("optimal_cost 7.5\n") == 0);
}

TEST_CASE("solve and solve2 agree and are byte-stable") {
  TempDir dir;
  const std::string p = dir.write("I2.json", serialize_problem(canonical_instance("I2")));
  const std::string a = (dir.path / "a.json").string(), b = (dir.path / "b.json").string();
  Run r1 = run({"solve", "--problem", p, "--out", a});
  Run r2 = run({"solve", "--problem", p, "--out", b});
  CHECK(r1.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(read_text_file(a) == read_text_file(b));
  Run r3 = run({"solve2", "--problem", p});
  CHECK(r3.out.substr(0, r3.out.find('\n')) == r1.out.substr(0, r1.out.find('\n')));
  CHECK(r1.out.find("optimal_cost 9.54263211008\n") == 0);

  Run ev = run({"evaluate", "--problem", p, "--design", a});
  CHECK(ev.code == 0);
  CHECK(ev.out.find("expected_cost 9.54263211008\n") == 0);
}

TEST_CASE("verify on I1 exits 0") {
  TempDir dir;
  const std::string p = dir.write("I1.json", serialize_problem(canonical_instance("I1")));
  Run r = run({"verify", "--problem", p, "--episodes", "20000"});
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("ALL PASS") != std::string::npos);
}

TEST_CASE("oracle over budget exits 3 with the count") {
  TempDir dir;
  const std::string p = dir.write("I1.json", serialize_problem(canonical_instance("I1")));
  Run r = run({"oracle", "--problem", p});
  CHECK(r.code == 3);
  CHECK(r.err.find("2.95147905179e+20") != std::string::npos);
}

TEST_CASE("oracle design file evaluates to the optimum") {
  TempDir dir;
  const std::string p = dir.write("IO.json", serialize_problem(canonical_instance("IO")));
  const std::string d = (dir.path / "d.json").string();
  Run r = run({"oracle", "--problem", p, "--out", d});
  CHECK(r.code == 0);
  CHECK(r.out == "optimal_cost 9.20193482143\ndesigns 1024\n");
  Run ev = run({"evaluate", "--problem", p, "--design", d});
  CHECK(ev.out.find("expected_cost 9.20193482143\n") == 0);
  Run sim = run({"simulate", "--problem", p, "--design", d, "--episodes", "500", "--seed", "3"});
  CHECK(sim.code == 0);
  CHECK(sim.out == run({"simulate", "--problem", p, "--design", d, "--episodes", "500",
                        "--seed", "3"}).out);
}

TEST_CASE("input errors exit 2") {
  TempDir dir;
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const std::string p = dir.write("I1.json", serialize_problem(canonical_instance("I1")));
  CHECK(run({"solve", "--problem", p, "--bogus"}).code == 2);
  CHECK(run({"solve"}).code == 2);
  CHECK(run({"solve", "--problem", (dir.path / "missing.json").string()}).code == 2);
  CHECK(run({"solve", "--problem", dir.write("bad.json", "{\"K\": ")}).code == 2);
  ProblemSpec s = canonical_instance("I1");
  s.x0_dist = {0.5, 0.6};
  Run bad = run({"solve", "--problem", dir.write("x0.json", serialize_problem(s))});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("x0_dist") != std::string::npos);
  CHECK(run({"kurtaran", "--problem", p}).code == 2);
  CHECK(run({"solve", "--problem", p, "--max-nodes", "0"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("graph budget exits 3") {
  TempDir dir;
  const std::string p = dir.write("I2.json", serialize_problem(canonical_instance("I2")));
  CHECK(run({"solve", "--problem", p, "--max-nodes", "10"}).code == 3);
}

TEST_CASE("kurtaran and probe-concavity report") {
  TempDir dir;
  const std::string p = dir.write("I2.json", serialize_problem(canonical_instance("I2")));
  Run k = run({"kurtaran", "--problem", p});
  CHECK(k.code == 0);
  CHECK(k.out.find("witness none") != std::string::npos);
  const std::string q = dir.write("I1.json", serialize_problem(canonical_instance("I1")));
  Run c = run({"probe-concavity", "--problem", q, "--samples", "20"});
  CHECK(c.code == 0);
  CHECK(c.out.find("PASS") != std::string::npos);
}

TEST_CASE("generate writes loadable instances") {
  TempDir dir;
  Run r = run({"generate", "--out", dir.path.string()});
  CHECK(r.code == 0);
  for (const auto& name : canonical_instance_names()) {
    CHECK(read_problem_file((dir.path / (name + ".json")).string()) ==
          normalized(canonical_instance(name)));
  }
}

TEST_CASE("design files round-trip") {
  ProblemSpec s = canonical_instance("IO");
  BruteForceResult bf = brute_force_optimum(s);
  auto back = load_design(s, design_json(*bf.design));
  CHECK(exact_cost(s, *back).expected_cost == bf.cost);

  Layout layout(canonical_instance("I2"));
  BeliefGraph g = reachable_graph(layout);
  DpSolution sol = solve_dp(layout, g);
  auto replay = load_design(layout.spec(), solution_json(layout, g, sol));
  CHECK(std::abs(exact_cost(layout.spec(), *replay).expected_cost - sol.optimal_cost) <= 1e-9);
  ThetaRGraph g2 = reachable_graph2(layout);
  DpSolution sol2 = solve_dp2(layout, g2);
  auto replay2 = load_design(layout.spec(), solution_json(layout, g2, sol2));
  CHECK(std::abs(exact_cost(layout.spec(), *replay2).expected_cost - sol2.optimal_cost) <= 1e-9);

  CHECK_THROWS_AS(load_design(s, "{}"), InputError);
  CHECK_THROWS_AS(load_design(s, "nope"), InputError);
  CHECK_THROWS_AS(load_design(canonical_instance("I1"), design_json(*bf.design)), InputError);
}
