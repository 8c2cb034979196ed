#include <doctest.h>

#include "delayshare/coordinator.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/evaluate.hpp"
#include "delayshare/instances.hpp"
#include "delayshare/second_form.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace delayshare;

namespace {

constexpr double kIOBruteForce = 9.201934821428571;
constexpr double kSmallN2BruteForce = 8.023004493464054;

ProblemSpec deterministic_chain() {
  ProblemSpec s = fixtures::single_state(2, 3, 1, 0.0);
  s.u_size = {2, 1};
  for (int t = 0; t < 3; ++t) {
    s.trans[t][0] = {Vec{1.0}, Vec{1.0}};
    s.cost[t][0] = {1.0 + t, 10.0 * (t + 1)};
  }
  return s;
}

}  // namespace

TEST_CASE("exact cost on trivial instances") {
  ProblemSpec one = fixtures::with_cost(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 4), 3.25);
  CHECK(exact_cost(one, HashedDesign(one, 1)).expected_cost == doctest::Approx(3.25).epsilon(1e-14));

  ProblemSpec chain = deterministic_chain();
  // controller 1 always plays 1: cost 10 + 20 + 30
  std::vector<std::vector<std::vector<std::vector<int>>>> laws(2);
  for (std::size_t deltas : {1, 2, 4}) {
    laws[0].emplace_back(deltas, std::vector<int>{1});
    laws[1].emplace_back(deltas, std::vector<int>{0});
  }
  ExtensionalDesign d(chain, laws);
  EvalResult r = exact_cost(chain, d);
  CHECK(r.expected_cost == 60.0);
  CHECK(r.per_stage == Vec{10.0, 20.0, 30.0});
}

TEST_CASE("exact cost equals trajectory enumeration") {
  for (const auto& spec : {canonical_instance("I1"), canonical_instance("I2"),
                           canonical_instance("IA"), fixtures::small_n2()}) {
    for (std::uint64_t seed : {1u, 2u}) {
      HashedDesign d(spec, seed);
      const double ref = oracle::total_cost(spec, oracle::from_design(spec, d));
      CHECK(std::abs(exact_cost(spec, d).expected_cost - ref) <= 1e-12);
    }
  }
}

TEST_CASE("extracted designs cost what the DP promises") {
  for (const auto& name : canonical_instance_names()) {
    CAPTURE(name);
    Layout layout(canonical_instance(name));
    DpSolution s1 = solve_dp(layout), s2 = solve_dp2(layout);
    CHECK(std::abs(exact_cost(layout.spec(), *extract_design(layout, s1)).expected_cost -
                   s1.optimal_cost) <= 1e-9);
    CHECK(std::abs(exact_cost(layout.spec(), *extract_design2(layout, s2)).expected_cost -
                   s2.optimal_cost) <= 1e-9);
  }
}

TEST_CASE("extracted design replays the coordinator") {
  Layout layout(canonical_instance("I2"));
  DpSolution sol = solve_dp(layout);
  auto d = extract_design(layout, sol);
  for (int t = 1; t <= 3; ++t) {
    for (auto& [delta, c] : history_conditionals(layout, *d, t)) {
      int node = 0;
      for (int tau = 1; tau < t; ++tau) {
        const std::size_t z = tau + 1 > 2 ? std::size_t(delta[tau - 2]) : 0;
        node = sol.children[tau - 1][node][z];
        REQUIRE(node >= 0);
      }
      CHECK(d->prescription(t, delta) == sol.policy.profiles[t - 1][node]);
      CHECK(std::abs(c.stage_cost -
                     expected_stage_cost(layout, {t, c.joint_state},
                                         sol.policy.profiles[t - 1][node])) <= 1e-12);
    }
  }
}

TEST_CASE("history conditionals equal exhaustive conditioning") {
  Layout layout(canonical_instance("I2"));
  HashedDesign d(layout.spec(), 21);
  auto policy = oracle::from_design(layout.spec(), d);
  for (int t = 1; t <= 3; ++t) {
    auto ref = oracle::conditionals(layout, policy, t);
    auto got = history_conditionals(layout, d, t);
    REQUIRE(ref.size() == got.size());
    for (auto& [delta, c] : ref) {
      const auto& h = got.at(delta);
      CHECK(std::abs(h.prob - c.prob) <= 1e-15);
      CHECK(oracle::linf(h.joint_state, c.joint) <= 1e-12);
      CHECK(oracle::linf(h.x_shared, c.x_shared) <= 1e-12);
      CHECK(std::abs(h.stage_cost - c.cost) <= 1e-12);
    }
  }
}

TEST_CASE("path budget") {
  ProblemSpec s = canonical_instance("I2");
  CHECK_THROWS_AS(exact_cost(s, HashedDesign(s, 1), 10), BudgetExceeded);
}

TEST_CASE("simulate") {
  ProblemSpec chain = deterministic_chain();
  HashedDesign d(chain, 3);
  SimResult r = simulate(chain, d, 50, 1);
  CHECK(r.mean == exact_cost(chain, d).expected_cost);
  CHECK(r.std_error == 0.0);

  ProblemSpec i2 = canonical_instance("I2");
  HashedDesign h(i2, 4);
  SimResult a = simulate(i2, h, 2000, 99), b = simulate(i2, h, 2000, 99);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.seed == 99);
  CHECK(simulate(i2, h, 2000, 98).mean != a.mean);
  CHECK_THROWS(simulate(i2, h, 0, 1));
}

TEST_CASE("Monte Carlo agrees with the exact cost on I1") {
  Layout layout(canonical_instance("I1"));
  auto d = extract_design(layout, solve_dp(layout));
  const double exact = exact_cost(layout.spec(), *d).expected_cost;
  SimResult r = simulate(layout.spec(), *d, 100'000, 7);
  CHECK(r.episodes == 100'000);
  CHECK(std::abs(r.mean - exact) <= 3.0 * r.std_error);
}

TEST_CASE("design counts") {
  CHECK(design_count(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 1)) == 16);
  CHECK(design_count(canonical_instance("IO")) == 1024);
  CHECK(design_count(random_instance({2, 2, 2, 2, {2, 2}, {2, 2}}, 1)) == 16.0 * 65536.0);
  CHECK(design_count(fixtures::small_n2()) == 1024);
}

TEST_CASE("design enumeration order and budget") {
  ProblemSpec s = canonical_instance("IO");
  std::size_t seen = 0;
  for_each_design(s, 1e5, [&](const ExtensionalDesign& d) {
    if (seen == 0) {
      for (auto& per_k : d.laws())
        for (auto& per_t : per_k)
          for (auto& per_d : per_t)
            for (int a : per_d) CHECK(a == 0);
    }
    if (seen == 1) CHECK(d.laws()[1].back().back().back() == 0);  // |U^2| = 1
    if (seen == 1) CHECK(d.laws()[0].back().back().back() == 1);
    ++seen;
    return true;
  });
  CHECK(seen == 1024);
  CHECK_THROWS_AS(for_each_design(s, 1000, [](const ExtensionalDesign&) { return true; }),
                  BudgetExceeded);
}

TEST_CASE("brute force optimum") {
  ProblemSpec zero = fixtures::with_cost(canonical_instance("IO"), 0.0);
  BruteForceResult z = brute_force_optimum(zero);
  CHECK(z.cost == 0.0);
  for (auto& per_k : z.design->laws())
    for (auto& per_t : per_k)
      for (auto& per_d : per_t)
        for (int a : per_d) CHECK(a == 0);

  Layout one(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 12));
  PiBelief pi = initial_belief(one);
  double best = 1e300;
  for_each_profile(one.spec(), 1, [&](const GammaProfile& g) {
    best = std::min(best, oracle::stage_cost(one, 1, pi.p, g));
    return true;
  });
  CHECK(std::abs(brute_force_optimum(one.spec()).cost - best) <= 1e-12);

  BruteForceResult io = brute_force_optimum(canonical_instance("IO"));
  CHECK(io.designs == 1024);
  CHECK(std::abs(io.cost - kIOBruteForce) <= 1e-12);
  CHECK(std::abs(exact_cost(canonical_instance("IO"), *io.design).expected_cost - io.cost) == 0.0);
  CHECK(std::abs(brute_force_optimum(fixtures::small_n2()).cost - kSmallN2BruteForce) <= 1e-12);
  CHECK_THROWS_AS(brute_force_optimum(canonical_instance("I1")), BudgetExceeded);
}
