#include "delayshare/verify.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "delayshare/analysis.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/evaluate.hpp"
#include "delayshare/second_form.hpp"

namespace delayshare {

namespace {

double linf(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

CommonHistory prefix(const CommonHistory& delta, int t, int n) {
  const std::size_t len = std::size_t(std::max(0, t - n));
  return CommonHistory(delta.begin(), delta.begin() + len);
}

// sum over z of P(z | pi, gamma).
double total_pz(const Layout& layout, const PiBelief& pi, const GammaProfile& g) {
  const std::size_t Z = common_obs_count(layout.spec(), pi.t + 1);
  double total = 0.0;
  for (std::size_t z = 0; z < Z; ++z) {
    try {
      total += belief_update(layout, pi, g, z).pz;
    } catch (const UnreachableObservation&) {
    }
  }
  return total;
}

}  // namespace

RecursionCheck check_recursions(const Layout& layout,
                                const std::vector<const Design*>& designs,
                                std::size_t max_paths) {
  const ProblemSpec& spec = layout.spec();
  RecursionCheck rc;
  std::map<std::pair<int, CommonHistory>, Vec> first_seen;
  for (const Design* d : designs) {
    for (int t = 1; t <= spec.T; ++t) {
      auto conds = history_conditionals(layout, *d, t, max_paths);
      for (const auto& [delta, h] : conds) {
        ++rc.histories;
        PiBelief pi = initial_belief(layout);
        ThetaRState tr = initial_theta_r(spec);
        for (int tau = 1; tau < t; ++tau) {
          GammaProfile g = d->prescription(tau, prefix(delta, tau, spec.n));
          const std::size_t z = tau + 1 > spec.n ? std::size_t(delta[tau - spec.n]) : 0;
          rc.pz_error = std::max(rc.pz_error, std::abs(total_pz(layout, pi, g) - 1.0));
          pi = belief_update(layout, pi, g, z).next;
          tr = theta_r_update(spec, tr, g, z);
        }
        GammaProfile g = d->prescription(t, delta);
        rc.pi_error = std::max(rc.pi_error, linf(pi.p, h.joint_state));
        rc.theta_error = std::max(rc.theta_error, linf(tr.theta.p, h.x_shared));
        rc.h_error = std::max(rc.h_error, linf(h_map(layout, tr).p, pi.p));
        rc.cost_error = std::max(
            rc.cost_error, std::abs(expected_stage_cost(layout, pi, g) - h.stage_cost));
        auto [it, fresh] = first_seen.emplace(std::make_pair(t, delta), h.x_shared);
        if (!fresh) {
          ++rc.shared;
          rc.design_gap = std::max(rc.design_gap, linf(it->second, h.x_shared));
        }
      }
    }
  }
  return rc;
}

double graph_mass_error(const std::vector<std::vector<Vec>>& class_mass) {
  double err = 0.0;
  for (const auto& per_t : class_mass) {
    for (const auto& mass : per_t) {
      double s = 0.0;
      for (double m : mass) s += m;
      err = std::max(err, std::abs(s - 1.0));
    }
  }
  return err;
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool VerifyReport::passed() const {
  for (const auto& c : checks) {
    if (c.status == VerifyCheck::Status::kFail) return false;
  }
  return true;
}

std::string VerifyReport::text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    const char* tag = c.status == VerifyCheck::Status::kPass   ? "PASS"
                      : c.status == VerifyCheck::Status::kFail ? "FAIL"
                                                               : "SKIP";
    os << tag << " " << c.name << ": " << c.detail << "\n";
  }
  os << (passed() ? "ALL PASS" : "FAILURES PRESENT") << "\n";
  return os.str();
}

VerifyReport verify_instance(const ProblemSpec& input, const VerifyOptions& opt) {
  using Status = VerifyCheck::Status;
  VerifyReport rep;
  auto add = [&](std::string name, bool ok, std::string detail) {
    rep.checks.push_back({std::move(name), ok ? Status::kPass : Status::kFail,
                          std::move(detail)});
  };
  auto skip = [&](std::string name, std::string detail) {
    rep.checks.push_back({std::move(name), Status::kSkip, std::move(detail)});
  };
  auto within = [](double err, double tol) { return err <= tol; };

  auto violations = validate_problem(input);
  add("problem.valid", violations.empty(),
      std::to_string(violations.size()) + " violations");
  if (!violations.empty()) return rep;
  add("problem.roundtrip", load_problem(serialize_problem(input)) == input,
      "serialize then load");

  const ProblemSpec spec = normalized(input);
  Layout layout(spec);

  BeliefGraph g1 = reachable_graph(layout, opt.graph);
  DpSolution s1 = solve_dp(layout, g1);
  ThetaRGraph g2 = reachable_graph2(layout, opt.graph);
  DpSolution s2 = solve_dp2(layout, g2);
  add("dp1.solve", true,
      "cost " + fmt12(s1.optimal_cost) + ", nodes " +
          std::to_string(g1.node_count()) + ", edges " +
          std::to_string(g1.edge_count()));
  add("dp2.solve", true,
      "cost " + fmt12(s2.optimal_cost) + ", nodes " +
          std::to_string(g2.node_count()) + ", edges " +
          std::to_string(g2.edge_count()));
  const double cross = std::abs(s1.optimal_cost - s2.optimal_cost);
  add("dp.cross", within(cross, 1e-9), "|dp1 - dp2| = " + fmt12(cross));

  auto d1 = extract_design(layout, s1);
  auto d2 = extract_design2(layout, s2);
  const double e1 = exact_cost(spec, *d1, opt.max_paths).expected_cost;
  const double e2 = exact_cost(spec, *d2, opt.max_paths).expected_cost;
  add("dp1.extract", within(std::abs(e1 - s1.optimal_cost), 1e-9),
      "exact cost " + fmt12(e1) + ", gap " + fmt12(std::abs(e1 - s1.optimal_cost)));
  add("dp2.extract", within(std::abs(e2 - s2.optimal_cost), 1e-9),
      "exact cost " + fmt12(e2) + ", gap " + fmt12(std::abs(e2 - s2.optimal_cost)));

  const double designs = design_count(spec);
  if (designs <= opt.max_designs) {
    auto bf = brute_force_optimum(spec, opt.max_designs, 1e12);
    const double gap = std::max(std::abs(bf.cost - s1.optimal_cost),
                                std::abs(bf.cost - s2.optimal_cost));
    add("oracle.brute_force", within(gap, 1e-9),
        "optimum " + fmt12(bf.cost) + " over " + fmt12(designs) +
            " designs, gap " + fmt12(gap));
  } else {
    skip("oracle.brute_force", fmt12(designs) + " designs exceed budget " +
                                   fmt12(opt.max_designs));
  }

  std::vector<std::unique_ptr<Design>> owned;
  std::vector<const Design*> designs_list{d1.get(), d2.get()};
  for (std::size_t i = 0; i < opt.random_designs; ++i) {
    owned.push_back(std::make_unique<HashedDesign>(spec, opt.seed * 1000 + i));
    designs_list.push_back(owned.back().get());
  }
  RecursionCheck rc = check_recursions(layout, designs_list, opt.max_paths);
  const std::string over = " over " + std::to_string(rc.histories) + " histories";
  add("recursion.pi", within(rc.pi_error, 1e-12), "max error " + fmt12(rc.pi_error) + over);
  add("recursion.theta", within(rc.theta_error, 1e-12),
      "max error " + fmt12(rc.theta_error) + over);
  add("recursion.h_map", within(rc.h_error, 1e-12), "max error " + fmt12(rc.h_error) + over);
  add("recursion.cost", within(rc.cost_error, 1e-12),
      "max error " + fmt12(rc.cost_error) + over);
  add("recursion.pz", within(rc.pz_error, 1e-12), "max |sum pz - 1| " + fmt12(rc.pz_error));
  const double mass_err = std::max(graph_mass_error(g1.class_mass),
                                   graph_mass_error(g2.class_mass));
  add("graph.mass", within(mass_err, 1e-12), "max |sum pz - 1| " + fmt12(mass_err));
  add("independence.theta", within(rc.design_gap, 1e-12),
      "max gap " + fmt12(rc.design_gap) + " over " + std::to_string(rc.shared) +
          " shared histories");

  if (spec.n == 1) {
    auto f = check_one_step_factorization(layout, *d1, *owned.front());
    add("one_step.factorization", f.passed,
        "factor error " + fmt12(f.max_factor_error) + ", design gap " +
            fmt12(f.max_design_gap));
  } else {
    skip("one_step.factorization", "n != 1");
  }

  bool product_state = true;
  try {
    require_product_state(spec);
  } catch (const PreconditionError&) {
    product_state = false;
  }
  if (product_state) {
    auto a = check_aicardi_degenerate(layout, opt.graph);
    add("product_state.degenerate", a.passed,
        "min peak " + fmt12(a.min_peak) + " over " + std::to_string(a.nodes_checked) +
            " nodes, indexed " + (a.indexed_by_state ? "yes" : "no"));
  } else {
    skip("product_state.degenerate", "not a product-state instance");
  }

  if (spec.n == 2 && spec.K == 2) {
    auto k = kurtaran_witness_search(spec, *d1, opt.max_paths);
    if (k.witness) {
      add("kurtaran.search", k.witness->verified,
          "witness at t=" + std::to_string(k.witness->t) + ", gap " +
              fmt12(k.witness->gap));
    } else {
      add("kurtaran.search", true,
          "no violation found; " + std::to_string(k.histories) + " histories, " +
              std::to_string(k.comparisons) + " comparisons");
    }
  } else {
    skip("kurtaran.search", "requires n = 2 and K = 2");
  }

  auto cp = concavity_probe(layout, opt.samples, opt.seed);
  add("pwlc.concavity", cp.passed,
      "min slack " + fmt12(cp.worst) + " with " + std::to_string(opt.samples) +
          " samples per t");
  try {
    AlphaSet alpha = alpha_backup(layout);
    const double gap = alpha_envelope_gap(layout, alpha, opt.samples, opt.seed);
    add("pwlc.alpha", within(gap, 1e-9), "envelope gap " + fmt12(gap));
  } catch (const BudgetExceeded& e) {
    skip("pwlc.alpha", e.what());
  }
  const double tree_gap = policy_alpha_envelope_gap(layout, opt.samples, opt.seed);
  add("pwlc.policy_alpha", within(tree_gap, 1e-9),
      "envelope gap " + fmt12(tree_gap) + " with " + std::to_string(opt.samples) +
          " policy-tree vectors per t");

  auto sim = simulate(spec, *d1, opt.episodes, opt.seed);
  const double dev = std::abs(sim.mean - e1);
  add("simulate.mc", dev <= 3.0 * sim.std_error || dev <= 1e-12,
      "mean " + fmt12(sim.mean) + ", std error " + fmt12(sim.std_error) +
          ", exact " + fmt12(e1));

  DpSolution again = solve_dp(layout, reachable_graph(layout, opt.graph));
  const bool same = again.values.J == s1.values.J &&
                    again.values.argmin == s1.values.argmin &&
                    again.children == s1.children;
  add("determinism.resolve", same, "second solve identical");
  return rep;
}

}  // namespace delayshare
