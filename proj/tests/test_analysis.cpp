#include <doctest.h>

#include "delayshare/analysis.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/instances.hpp"
#include "delayshare/second_form.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace delayshare;

namespace {

// Y_1 carries no information, X_1 ignores U_1 and Y_3 is informative.
ProblemSpec witness_instance() {
  ProblemSpec s = random_instance({2, 4, 2, 2, {2, 2}, {2, 2}}, 31);
  for (int k = 0; k < 2; ++k) {
    s.obs[k][0] = {{0.5, 0.5}, {0.5, 0.5}};
    s.obs[k][2] = {{0.9, 0.1}, {0.2, 0.8}};
  }
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 4; ++a) s.trans[0][x][a] = s.trans[0][x][0];
  return s;
}

// u_1 = y_1, u_2 = y_2, and at t = 3 controller 1 plays y_3 flipped by the
// shared y^1_1. Phi_3 is the same for every delta_3; Phi_4 is not.
class FlipDesign : public Design {
 public:
  explicit FlipDesign(const ProblemSpec& spec) : spec_(spec) {}
  GammaProfile prescription(int t, std::span<const int> delta) const override {
    GammaProfile g{t, {}};
    for (int k = 0; k < 2; ++k) {
      const WindowSpace w = private_layout(spec_, k, t);
      std::vector<int> tab(w.size());
      std::vector<int> ys, us;
      for (std::size_t r = 0; r < w.size(); ++r) {
        w.decode(r, ys, us);
        int a = ys.back();
        if (t == 3 && k == 0) a ^= common_obs(spec_, 3, std::size_t(delta[0])).y[0];
        if (t == 3 && k == 1) a = 0;
        tab[r] = a;
      }
      g.tables.push_back(std::move(tab));
    }
    return g;
  }

 private:
  const ProblemSpec& spec_;
};

}  // namespace

TEST_CASE("one-step factorization on n = 1 instances") {
  for (const auto& name : {"IO", "I1"}) {
    CAPTURE(name);
    Layout layout(canonical_instance(name));
    auto d = extract_design(layout, solve_dp(layout));
    HashedDesign other(layout.spec(), 5);
    FactorizationReport r = check_one_step_factorization(layout, *d, other);
    CHECK(r.passed);
    CHECK(r.max_factor_error <= 1e-12);
    CHECK(r.max_design_gap <= 1e-12);
    CHECK(r.shared_histories > 0);
  }
  ProblemSpec s = canonical_instance("I1");
  for (auto& per_k : s.obs)
    for (auto& per_t : per_k) per_t = {{0.5, 0.5}, {0.5, 0.5}};
  Layout flat(s);
  CHECK(check_one_step_factorization(flat, HashedDesign(s, 1), HashedDesign(s, 2)).passed);
  Layout i2(canonical_instance("I2"));
  CHECK_THROWS_AS(check_one_step_factorization(i2, HashedDesign(i2.spec(), 1),
                                               HashedDesign(i2.spec(), 2)),
                  PreconditionError);
}

TEST_CASE("product-state instances have point-mass theta after n") {
  Layout ia(canonical_instance("IA"));
  AicardiReport r = check_aicardi_degenerate(ia);
  CHECK(r.passed);
  CHECK(r.min_peak == 1.0);
  CHECK(r.indexed_by_state);
  CHECK(std::abs(r.dp1_cost - r.dp2_cost) <= 1e-9);
  CHECK(initial_theta_r(ia.spec()).theta.p == ia.spec().x0_dist);

  Layout other(product_state_instance(2, 4, 1, 77));
  CHECK(check_aicardi_degenerate(other).passed);
  CHECK_THROWS_AS(require_product_state(canonical_instance("I2")), PreconditionError);
}

TEST_CASE("Kurtaran search: a single common history exhausts by structure") {
  ProblemSpec s = random_instance({2, 2, 2, 2, {2, 2}, {2, 2}}, 3);
  KurtaranReport r = kurtaran_witness_search(s, HashedDesign(s, 1));
  CHECK_FALSE(r.witness);
  CHECK(r.comparisons == 0);
  ProblemSpec i2 = canonical_instance("I2");
  Layout layout(i2);
  KurtaranReport r2 = kurtaran_witness_search(i2, *extract_design(layout, solve_dp(layout)));
  CHECK_FALSE(r2.witness);
  CHECK(r2.histories == 1);
  CHECK_THROWS_AS(kurtaran_witness_search(canonical_instance("I1"),
                                          HashedDesign(canonical_instance("I1"), 1)),
                  PreconditionError);
}

TEST_CASE("Kurtaran search finds and re-verifies an engineered witness") {
  ProblemSpec s = witness_instance();
  REQUIRE(validate_problem(s).empty());
  FlipDesign d(s);
  KurtaranReport r = kurtaran_witness_search(s, d);
  REQUIRE(r.witness);
  const KurtaranWitness& w = *r.witness;
  CHECK(w.verified);
  CHECK(w.t == 3);
  CHECK(w.delta != w.delta_prime);
  CHECK(oracle::linf(w.phi, w.phi_other) <= 1e-12);
  CHECK(w.gap > 1e-6);
  // independent recomputation
  CHECK(oracle::linf(kurtaran_phi(s, d, 3, w.delta), w.phi) <= 1e-12);
  CommonHistory e1 = w.delta, e2 = w.delta_prime;
  e1.push_back(int(w.z));
  e2.push_back(int(w.z));
  CHECK(oracle::linf(kurtaran_phi(s, d, 4, e1), kurtaran_phi(s, d, 4, e2)) == doctest::Approx(w.gap));
}

TEST_CASE("Kurtaran phi matches trajectory conditioning") {
  ProblemSpec s = witness_instance();
  FlipDesign d(s);
  auto policy = oracle::from_design(s, d);
  // Phi_4 = P(X_2, U_3 | delta_4), flattened as x * 4 + a
  std::map<CommonHistory, Vec> ref;
  std::map<CommonHistory, double> mass;
  oracle::prefixes(s, policy, 4, [&](double p, const std::vector<int>& xs,
                                     const oracle::Seqs& ys, const oracle::Seqs& us) {
    CommonHistory delta = oracle::delta_of(s, 4, ys, us);
    auto& v = ref[delta];
    v.resize(8, 0.0);
    v[xs[2] * 4 + oracle::joint_index(s, {us[0][2], us[1][2]})] += p;
    mass[delta] += p;
  });
  for (auto& [delta, v] : ref) {
    for (double& x : v) x /= mass[delta];
    CHECK(oracle::linf(kurtaran_phi(s, d, 4, delta), v) <= 1e-12);
  }
}

TEST_CASE("random belief") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    Vec v = random_belief(7, rng);
    double sum = 0.0;
    for (double x : v) {
      CHECK(x >= 0.0);
      sum += x;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("concavity: endpoints and equal beliefs give zero slack") {
  Layout layout(canonical_instance("I1"));
  ValueOracle vo(layout);
  std::mt19937_64 rng(4);
  PiBelief a{1, random_belief(layout.states(1).size(), rng)};
  PiBelief b{1, random_belief(layout.states(1).size(), rng)};
  CHECK(vo.value(a) - (1.0 * vo.value(a) + 0.0 * vo.value(b)) == 0.0);
  CHECK(vo.value(a) - (0.5 * vo.value(a) + 0.5 * vo.value(a)) == 0.0);
}

TEST_CASE("concavity probe on I1 and I2") {
  for (const auto& name : {"I1", "I2"}) {
    CAPTURE(name);
    Layout layout(canonical_instance(name));
    ConcavityReport r = concavity_probe(layout, 100, 7);
    CHECK(r.passed);
    CHECK(r.worst >= -1e-9);
    CHECK(r.samples == 100);
  }
}

TEST_CASE("policy-tree alpha vectors") {
  Layout layout(canonical_instance("I1"));
  ValueOracle vo(layout);
  std::mt19937_64 rng(8);
  for (int t = 1; t <= 2; ++t) {
    PiBelief pi{t, random_belief(layout.states(t).size(), rng)};
    Vec a = policy_alpha(layout, vo, pi);
    double dot = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) dot += a[s] * pi.p[s];
    CHECK(std::abs(dot - vo.value(pi)) <= 1e-12);
    for (int rep = 0; rep < 20; ++rep) {
      PiBelief q{t, random_belief(layout.states(t).size(), rng)};
      double dq = 0.0;
      for (std::size_t s = 0; s < a.size(); ++s) dq += a[s] * q.p[s];
      CHECK(dq >= vo.value(q) - 1e-12);
    }
  }
  CHECK(policy_alpha_envelope_gap(layout, 100, 7) <= 1e-9);
}
