#include <doctest.h>

#include <random>

#include "delayshare/analysis.hpp"
#include "delayshare/coordinator.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/instances.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace delayshare;

namespace {

// IO and the small n = 2 instance, minimized over all 1024 designs by the
// standalone brute force in python/tests/brute_force.py.
constexpr double kIOBruteForce = 9.201934821428571;
constexpr double kSmallN2BruteForce = 8.023004493464054;

ProblemSpec deterministic_obs(ProblemSpec s) {
  for (auto& per_k : s.obs)
    for (auto& per_t : per_k)
      for (std::size_t x = 0; x < per_t.size(); ++x) {
        std::fill(per_t[x].begin(), per_t[x].end(), 0.0);
        per_t[x][x % per_t[x].size()] = 1.0;
      }
  return s;
}

}  // namespace

TEST_CASE("initial belief equals the direct product") {
  for (const auto& name : canonical_instance_names()) {
    CAPTURE(name);
    Layout layout(canonical_instance(name));
    CHECK(oracle::linf(initial_belief(layout).p, oracle::initial(layout)) <= 1e-15);
  }
  ProblemSpec s = random_instance({2, 2, 1, 1, {3, 2}, {2, 2}}, 8);
  Layout layout(s);
  PiBelief pi = initial_belief(layout);
  const auto& st = layout.states(1);
  for (std::size_t i = 0; i < st.size(); ++i) {
    CHECK(pi.p[i] == doctest::Approx(s.obs[0][0][0][st.lambda(i, 0)] *
                                     s.obs[1][0][0][st.lambda(i, 1)]));
  }
}

TEST_CASE("deterministic observations collapse the initial belief") {
  ProblemSpec s = deterministic_obs(canonical_instance("I1"));
  s.x0_dist = {1.0, 0.0};
  Layout layout(s);
  PiBelief pi = initial_belief(layout);
  int support = 0;
  for (std::size_t i = 0; i < pi.p.size(); ++i) {
    if (pi.p[i] > 0) {
      ++support;
      CHECK(layout.states(1).x_prev(i) == 0);
    }
  }
  CHECK(support == 1);
}

TEST_CASE("step kernel on a single-state instance") {
  Layout layout(fixtures::single_state(2, 3, 1, 1.0));
  StepKernel k = joint_step_kernel(layout, 1, 0, profile_at(layout.spec(), 1, 0));
  REQUIRE(k.next.size() == 1);
  CHECK(k.next[0].second == 1.0);
}

TEST_CASE("n = 1: revealed z is (y_t, gamma(y_t)) symbol by symbol") {
  Layout layout(canonical_instance("I1"));
  const ProblemSpec& s = layout.spec();
  const auto& st = layout.states(1);
  for_each_profile(s, 1, [&](const GammaProfile& g) {
    for (std::size_t i = 0; i < st.size(); ++i) {
      StepKernel k = joint_step_kernel(layout, 1, i, g);
      CommonObs z = common_obs(s, 2, k.z);
      for (int c = 0; c < 2; ++c) {
        CHECK(z.y[c] == int(st.lambda(i, c)));
        CHECK(z.u[c] == g.tables[c][st.lambda(i, c)]);
      }
    }
    return true;
  });
}

TEST_CASE("step kernel equals the decoded-window step from a point mass") {
  for (const auto& name : {"I1", "I2", "IA"}) {
    CAPTURE(name);
    Layout layout(canonical_instance(name));
    const ProblemSpec& s = layout.spec();
    HashedDesign d(s, 3);
    for (int t = 1; t < s.T; ++t) {
      GammaProfile g = d.prescription(t, CommonHistory(std::max(0, t - s.n), 0));
      const auto& st = layout.states(t);
      for (std::size_t i = 0; i < st.size(); ++i) {
        Vec point(st.size(), 0.0);
        point[i] = 1.0;
        auto ref = oracle::step(layout, t, point, g).unnormalized;
        StepKernel k = joint_step_kernel(layout, t, i, g);
        REQUIRE(ref.size() == 1);
        CHECK(ref.begin()->first == k.z);
        Vec dense(layout.states(t + 1).size(), 0.0);
        for (auto [s2, p] : k.next) dense[s2] += p;
        CHECK(oracle::linf(dense, ref.begin()->second) <= 1e-15);
      }
    }
  }
}

TEST_CASE("belief update equals direct Bayes for every z") {
  for (const auto& name : {"I1", "I2", "IA"}) {
    CAPTURE(name);
    Layout layout(canonical_instance(name));
    const ProblemSpec& s = layout.spec();
    std::mt19937_64 rng(17);
    for (int t = 1; t < s.T; ++t) {
      for (int rep = 0; rep < 5; ++rep) {
        PiBelief pi{t, random_belief(layout.states(t).size(), rng)};
        GammaProfile g = profile_at(s, t, rng() % profile_count(s, t));
        auto ref = oracle::step(layout, t, pi.p, g).unnormalized;
        double total = 0.0;
        for (std::size_t z = 0; z < common_obs_count(s, t + 1); ++z) {
          auto it = ref.find(z);
          if (it == ref.end()) {
            CHECK_THROWS_AS(belief_update(layout, pi, g, z), UnreachableObservation);
            continue;
          }
          BeliefStep step = belief_update(layout, pi, g, z);
          double pz = 0.0;
          for (double m : it->second) pz += m;
          CHECK(std::abs(step.pz - pz) <= 1e-15);
          Vec post(it->second);
          for (double& m : post) m /= pz;
          CHECK(oracle::linf(step.next.p, post) <= 1e-12);
          double mass = 0.0;
          for (double m : step.next.p) mass += m;
          CHECK(std::abs(mass - 1.0) <= 1e-12);
          total += step.pz;
        }
        CHECK(std::abs(total - 1.0) <= 1e-12);
      }
    }
  }
}

TEST_CASE("update before any sharing is a pure prediction") {
  Layout layout(canonical_instance("I2"));
  PiBelief pi = initial_belief(layout);
  GammaProfile g = profile_at(layout.spec(), 1, 2);
  BeliefStep step = belief_update(layout, pi, g, 0);
  CHECK(std::abs(step.pz - 1.0) <= 1e-15);
  auto ref = oracle::step(layout, 1, pi.p, g).unnormalized;
  CHECK(oracle::linf(step.next.p, ref.at(0)) <= 1e-15);
}

TEST_CASE("point mass with a mismatching z is unreachable") {
  Layout layout(canonical_instance("I1"));
  const auto& st = layout.states(1);
  Vec p(st.size(), 0.0);
  p[0] = 1.0;  // x = 0, y = (0, 0)
  GammaProfile g = profile_at(layout.spec(), 1, 0);
  CHECK(joint_step_kernel(layout, 1, 0, g).z == 0);
  CHECK_THROWS_AS(belief_update(layout, {1, p}, g, 5), UnreachableObservation);
}

TEST_CASE("expected stage cost") {
  Layout flat(fixtures::with_cost(canonical_instance("I2"), 2.5));
  std::mt19937_64 rng(1);
  for (int t = 1; t <= 3; ++t) {
    PiBelief pi{t, random_belief(flat.states(t).size(), rng)};
    CHECK(expected_stage_cost(flat, pi, profile_at(flat.spec(), t, 7)) ==
          doctest::Approx(2.5).epsilon(1e-14));
  }
  Layout layout(canonical_instance("I1"));
  PiBelief pi = initial_belief(layout);
  GammaProfile g = profile_at(layout.spec(), 1, 5);
  CHECK(std::abs(expected_stage_cost(layout, pi, g) -
                 oracle::stage_cost(layout, 1, pi.p, g)) <= 1e-14);
}

TEST_CASE("branching minimize equals full profile enumeration") {
  struct Case {
    ProblemSpec spec;
    int t;
  };
  std::vector<Case> cases{{canonical_instance("I1"), 1},
                          {canonical_instance("I1"), 2},
                          {canonical_instance("I2"), 1},
                          {canonical_instance("I2"), 2},
                          {random_instance({3, 2, 1, 1, {2, 1, 2}, {2, 2, 1}}, 2), 1},
                          {random_instance({2, 3, 2, 2, {2, 1}, {2, 2}}, 2), 2}};
  std::mt19937_64 rng(5);
  for (auto& c : cases) {
    Layout layout(c.spec);
    const Branching& br = layout.branching(c.t);
    const std::size_t C = br.class_tuples(), R = br.restriction_tuples();
    for (int rep = 0; rep < 3; ++rep) {
      Vec f(C * R);
      for (double& v : f) v = double(rng() % 1000) / 7.0;
      TeamChoice got = br.minimize(f);
      double best = std::numeric_limits<double>::infinity();
      std::uint64_t best_rank = 0;
      for_each_profile(c.spec, c.t, [&](const GammaProfile& g) {
        double v = 0.0;
        for (std::size_t ct = 0; ct < C; ++ct) v += f[ct * R + br.restriction_tuple_of(g, ct)];
        if (v < best - 1e-12) best = v, best_rank = profile_rank(c.spec, g);
        return true;
      });
      CHECK(std::abs(got.value - best) <= 1e-9);
      double achieved = 0.0;
      for (std::size_t ct = 0; ct < C; ++ct)
        achieved += f[ct * R + br.restriction_tuple_of(got.profile, ct)];
      CHECK(std::abs(achieved - got.value) <= 1e-9);
      CHECK(got.rank == profile_rank(c.spec, got.profile));
      CHECK(got.rank == best_rank);
    }
  }
}

TEST_CASE("belief index matches within tolerance only") {
  BeliefIndex idx(1e-9);
  Vec a{0.25, 0.75};
  CHECK(idx.intern(a, 0).second);
  CHECK(idx.find({0.25 + 1e-10, 0.75 - 1e-10}) == 0);
  CHECK(idx.find({0.26, 0.74}) == -1);
  CHECK(idx.find(a, 1) == -1);
  auto [id, fresh] = idx.intern({0.25, 0.75}, 9);
  CHECK(id == 0);
  CHECK_FALSE(fresh);
}

TEST_CASE("reachable graph sizes") {
  Layout one(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 1));
  CHECK(reachable_graph(one).node_count() == 1);
  // recorded after the cost cross-checks below and in verify
  Layout io(canonical_instance("IO"));
  BeliefGraph g0 = reachable_graph(io);
  CHECK(g0.node_count() == 5);
  CHECK(g0.edge_count() == 4);
  Layout i1(canonical_instance("I1"));
  BeliefGraph g1 = reachable_graph(i1);
  CHECK(g1.node_count() == 17);
  CHECK(g1.edge_count() == 16);
  Layout i2(canonical_instance("I2"));
  BeliefGraph g2 = reachable_graph(i2);
  CHECK(g2.node_count() == 273);
  CHECK(g2.edge_count() == 1040);
  Layout single(fixtures::single_state(2, 4, 2, 1.0));
  BeliefGraph gs = reachable_graph(single);
  for (const auto& level : gs.beliefs) CHECK(level.size() >= 1);
}

TEST_CASE("graph budget") {
  Layout layout(canonical_instance("I1"));
  GraphBudget b;
  b.max_nodes = 3;
  CHECK_THROWS_AS(reachable_graph(layout, b), BudgetExceeded);
}

TEST_CASE("solve_dp: one stage is the best profile") {
  Layout layout(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 12));
  DpSolution sol = solve_dp(layout);
  PiBelief pi = initial_belief(layout);
  double best = std::numeric_limits<double>::infinity();
  for_each_profile(layout.spec(), 1, [&](const GammaProfile& g) {
    best = std::min(best, oracle::stage_cost(layout, 1, pi.p, g));
    return true;
  });
  CHECK(std::abs(sol.optimal_cost - best) <= 1e-12);
}

TEST_CASE("solve_dp: zero cost gives zero values and rank 0") {
  Layout layout(fixtures::with_cost(canonical_instance("I2"), 0.0));
  DpSolution sol = solve_dp(layout);
  for (const auto& level : sol.values.J)
    for (double v : level) CHECK(v == 0.0);
  for (const auto& level : sol.values.argmin)
    for (auto r : level) CHECK(r == 0);
}

TEST_CASE("solve_dp against brute force and full recursion") {
  Layout io(canonical_instance("IO"));
  CHECK(std::abs(solve_dp(io).optimal_cost - kIOBruteForce) <= 1e-9);
  Layout small(fixtures::small_n2());
  CHECK(std::abs(solve_dp(small).optimal_cost - kSmallN2BruteForce) <= 1e-9);
  // I1 has 2^68 designs; the full profile recursion is the oracle instead.
  Layout i1(canonical_instance("I1"));
  const double ref = oracle::value(i1, 1, oracle::initial(i1));
  CHECK(std::abs(solve_dp(i1).optimal_cost - ref) <= 1e-9);
  CHECK(std::abs(ref - 5.74873519778) <= 1e-10);
}

TEST_CASE("value oracle at graph nodes and at the horizon") {
  Layout layout(canonical_instance("I2"));
  BeliefGraph g = reachable_graph(layout);
  DpSolution sol = solve_dp(layout, g);
  ValueOracle vo(layout);
  for (int t = 1; t <= 3; ++t) {
    for (std::size_t i = 0; i < g.beliefs[t - 1].size(); i += 7) {
      CHECK(std::abs(vo.value({t, g.beliefs[t - 1][i]}) - sol.values.J[t - 1][i]) <= 1e-9);
    }
  }
  Layout i1(canonical_instance("I1"));
  ValueOracle v1(i1);
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    PiBelief pi{2, random_belief(i1.states(2).size(), rng)};
    CHECK(std::abs(v1.value(pi) - oracle::value(i1, 2, pi.p)) <= 1e-12);
  }
}

TEST_CASE("extract_design: one stage gives the root profile") {
  Layout layout(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 12));
  DpSolution sol = solve_dp(layout);
  auto d = extract_design(layout, sol);
  CHECK(d->prescription(1, {}) == sol.policy.profiles[0][0]);
}

TEST_CASE("alpha vectors") {
  Layout zero(fixtures::with_cost(canonical_instance("I1"), 0.0));
  for (const auto& level : alpha_backup(zero).vectors)
    for (const auto& a : level)
      for (double v : a) CHECK(v == 0.0);

  Layout one(random_instance({2, 1, 1, 2, {2, 2}, {2, 2}}, 12));
  AlphaSet top = alpha_backup(one);
  const auto& st = one.states(1);
  for_each_profile(one.spec(), 1, [&](const GammaProfile& g) {
    Vec v(st.size());
    for (std::size_t s = 0; s < st.size(); ++s) {
      Vec point(st.size(), 0.0);
      point[s] = 1.0;
      v[s] = oracle::stage_cost(one, 1, point, g);
    }
    bool covered = false;
    for (const auto& a : top.vectors[0]) {
      bool le = true;
      for (std::size_t s = 0; s < st.size(); ++s) le = le && a[s] <= v[s] + 1e-12;
      covered = covered || le;
    }
    CHECK(covered);
    return true;
  });

  Layout i1(canonical_instance("I1"));
  AlphaSet alpha = alpha_backup(i1);
  CHECK(alpha_envelope_gap(i1, alpha, 100, 7) <= 1e-9);
  CHECK_THROWS_AS(alpha_backup(Layout(canonical_instance("I2"))), BudgetExceeded);
}

TEST_CASE("prune keeps one of equal vectors and drops dominated ones") {
  auto kept = prune_dominated({{1, 2}, {1, 2}, {0, 3}, {2, 3}});
  CHECK(kept.size() == 2);
}
