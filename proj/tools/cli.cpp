#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "delayshare/analysis.hpp"
#include "delayshare/coordinator.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/evaluate.hpp"
#include "delayshare/instances.hpp"
#include "delayshare/io.hpp"
#include "delayshare/second_form.hpp"
#include "delayshare/verify.hpp"

namespace delayshare::cli {

namespace {

struct RunConfig {
  std::string problem;
  std::string out;
  std::string design;
  std::uint64_t seed = 7;
  std::size_t episodes = 100'000;
  std::size_t samples = 100;
  std::size_t max_nodes = 2'000'000;
  double max_designs = 1e5;
  std::size_t max_paths = 10'000'000;
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
  if (!f) throw InputError("write failed: " + path);
}

GraphBudget graph_budget(const RunConfig& cfg) {
  GraphBudget b;
  b.max_nodes = cfg.max_nodes;
  return b;
}

std::unique_ptr<Design> design_or_dp(const RunConfig& cfg, const Layout& layout) {
  if (!cfg.design.empty()) return read_design_file(layout.spec(), cfg.design);
  return extract_design(layout, solve_dp(layout, graph_budget(cfg)));
}

int cmd_solve(const RunConfig& cfg, bool second, std::ostream& out) {
  Layout layout(read_problem_file(cfg.problem));
  const GraphBudget budget = graph_budget(cfg);
  std::string json;
  std::size_t nodes = 0, edges = 0;
  double cost = 0.0;
  if (second) {
    ThetaRGraph g = reachable_graph2(layout, budget);
    DpSolution s = solve_dp2(layout, g);
    json = solution_json(layout, g, s);
    nodes = g.node_count(), edges = g.edge_count(), cost = s.optimal_cost;
  } else {
    BeliefGraph g = reachable_graph(layout, budget);
    DpSolution s = solve_dp(layout, g);
    json = solution_json(layout, g, s);
    nodes = g.node_count(), edges = g.edge_count(), cost = s.optimal_cost;
  }
  if (!cfg.out.empty()) write_file(cfg.out, json);
  out << "optimal_cost " << fmt12(cost) << "\n"
      << "nodes " << nodes << "\n"
      << "edges " << edges << "\n";
  return kOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const ProblemSpec spec = read_problem_file(cfg.problem);
  auto design = read_design_file(spec, cfg.design);
  EvalResult r = exact_cost(spec, *design, cfg.max_paths);
  out << "expected_cost " << fmt12(r.expected_cost) << "\n";
  for (std::size_t t = 0; t < r.per_stage.size(); ++t) {
    out << "stage " << t + 1 << " " << fmt12(r.per_stage[t]) << "\n";
  }
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  const ProblemSpec spec = read_problem_file(cfg.problem);
  auto design = read_design_file(spec, cfg.design);
  SimResult r = simulate(spec, *design, cfg.episodes, cfg.seed);
  out << "episodes " << r.episodes << "\n"
      << "seed " << r.seed << "\n"
      << "mean " << fmt12(r.mean) << "\n"
      << "std_error " << fmt12(r.std_error) << "\n";
  return kOk;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const ProblemSpec spec = read_problem_file(cfg.problem);
  BruteForceResult r = brute_force_optimum(spec, cfg.max_designs, 1e12);
  if (!cfg.out.empty()) write_file(cfg.out, design_json(*r.design));
  out << "optimal_cost " << fmt12(r.cost) << "\n"
      << "designs " << fmt12(r.designs) << "\n";
  return kOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.samples = cfg.samples;
  opt.episodes = cfg.episodes;
  opt.max_designs = cfg.max_designs;
  opt.max_paths = cfg.max_paths;
  opt.graph = graph_budget(cfg);
  VerifyReport rep = verify_instance(read_problem_file(cfg.problem), opt);
  const std::string text = rep.text();
  out << text;
  if (!cfg.out.empty()) write_file(cfg.out, text);
  return rep.passed() ? kOk : kInvariantFailure;
}

void print_vec(std::ostream& out, const char* name, const Vec& v) {
  out << name;
  for (double x : v) out << " " << fmt12(x);
  out << "\n";
}

void print_delta(std::ostream& out, const char* name, const CommonHistory& d) {
  out << name;
  for (auto z : d) out << " " << z;
  out << "\n";
}

int cmd_kurtaran(const RunConfig& cfg, std::ostream& out) {
  Layout layout(read_problem_file(cfg.problem));
  auto design = design_or_dp(cfg, layout);
  KurtaranReport r = kurtaran_witness_search(layout.spec(), *design, cfg.max_paths);
  out << "histories " << r.histories << "\n"
      << "groups " << r.groups << "\n"
      << "comparisons " << r.comparisons << "\n";
  if (!r.witness) {
    out << "witness none\n";
    return kOk;
  }
  const KurtaranWitness& w = *r.witness;
  out << "witness t " << w.t << "\n";
  print_delta(out, "delta", w.delta);
  print_delta(out, "delta_prime", w.delta_prime);
  print_vec(out, "phi", w.phi);
  out << "z " << w.z << "\n";
  print_vec(out, "phi_next", w.phi_prime_1);
  print_vec(out, "phi_next_prime", w.phi_prime_2);
  out << "gap " << fmt12(w.gap) << "\n"
      << "verified " << (w.verified ? "yes" : "no") << "\n";
  return w.verified ? kOk : kInvariantFailure;
}

int cmd_concavity(const RunConfig& cfg, std::ostream& out) {
  Layout layout(read_problem_file(cfg.problem));
  ConcavityReport r = concavity_probe(layout, cfg.samples, cfg.seed);
  out << "samples " << r.samples << "\n";
  for (std::size_t t = 0; t < r.min_slack.size(); ++t) {
    out << "min_slack t " << t + 1 << " " << fmt12(r.min_slack[t]) << "\n";
  }
  out << "worst " << fmt12(r.worst) << "\n"
      << (r.passed ? "PASS" : "FAIL") << "\n";
  return r.passed ? kOk : kInvariantFailure;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const std::filesystem::path dir = cfg.out.empty() ? "." : cfg.out;
  std::filesystem::create_directories(dir);
  for (const auto& name : canonical_instance_names()) {
    const auto path = dir / (name + ".json");
    write_file(path.string(), serialize_problem(canonical_instance(name)));
    out << "wrote " << path.string() << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Exact coordinator solvers for delayed-sharing team problems",
               "delayshare"};
  app.require_subcommand(1, 1);
  RunConfig cfg;

  auto problem = [&](CLI::App* sub) {
    sub->add_option("--problem", cfg.problem, "problem JSON file")->required();
  };
  auto budgets = [&](CLI::App* sub) {
    sub->add_option("--max-nodes", cfg.max_nodes, "graph node budget")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--max-paths", cfg.max_paths, "trajectory prefix budget")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
  };

  auto* solve = app.add_subcommand("solve", "DP over reachable coordinator beliefs");
  auto* solve2 = app.add_subcommand("solve2", "DP over (Theta, r) information states");
  for (auto* s : {solve, solve2}) {
    problem(s);
    budgets(s);
    s->add_option("--out", cfg.out, "solution JSON output");
  }

  auto* evaluate = app.add_subcommand("evaluate", "exact expected cost of a design");
  problem(evaluate);
  budgets(evaluate);
  evaluate->add_option("--design", cfg.design, "design or solution JSON")->required();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo cost of a design");
  problem(sim);
  sim->add_option("--design", cfg.design, "design or solution JSON")->required();
  sim->add_option("--episodes", cfg.episodes, "episodes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", cfg.seed, "seed")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "brute-force optimum over all designs");
  problem(oracle);
  oracle->add_option("--max-designs", cfg.max_designs, "design enumeration budget")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  oracle->add_option("--out", cfg.out, "optimal design JSON output");

  auto* verify = app.add_subcommand("verify", "full invariant suite on one instance");
  problem(verify);
  budgets(verify);
  verify->add_option("--seed", cfg.seed, "seed")->capture_default_str();
  verify->add_option("--samples", cfg.samples, "random beliefs per t")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--episodes", cfg.episodes, "Monte Carlo episodes")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--max-designs", cfg.max_designs, "brute force only below this")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  verify->add_option("--out", cfg.out, "report text output");

  auto* kurtaran = app.add_subcommand("kurtaran", "search for a non-separating history pair");
  problem(kurtaran);
  budgets(kurtaran);
  kurtaran->add_option("--design", cfg.design, "design or solution JSON (default: DP optimum)");

  auto* probe = app.add_subcommand("probe-concavity", "midpoint concavity probe of J_t");
  problem(probe);
  probe->add_option("--samples", cfg.samples, "random pairs per t")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  probe->add_option("--seed", cfg.seed, "seed")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "write the canonical instances");
  generate->add_option("--out", cfg.out, "output directory");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kInputError;
  }

  try {
    if (*solve) return cmd_solve(cfg, false, out);
    if (*solve2) return cmd_solve(cfg, true, out);
    if (*evaluate) return cmd_evaluate(cfg, out);
    if (*sim) return cmd_simulate(cfg, out);
    if (*oracle) return cmd_oracle(cfg, out);
    if (*verify) return cmd_verify(cfg, out);
    if (*kurtaran) return cmd_kurtaran(cfg, out);
    if (*probe) return cmd_concavity(cfg, out);
    if (*generate) return cmd_generate(cfg, out);
  } catch (const BudgetExceeded& e) {
    err << "budget exceeded: " << e.what() << "\n";
    return kBudget;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "precondition: " << e.what() << "\n";
    return kInputError;
  } catch (const OffDesignHistory& e) {
    err << "design error: " << e.what() << "\n";
    return kInputError;
  } catch (const UnreachableObservation& e) {
    err << "design error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace delayshare::cli
