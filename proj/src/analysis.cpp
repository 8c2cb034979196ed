#include "delayshare/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "delayshare/errors.hpp"
#include "delayshare/evaluate.hpp"
#include "delayshare/random.hpp"
#include "delayshare/second_form.hpp"

namespace delayshare {

namespace {

double linf(const Vec& a, const Vec& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

void normalize(Vec& v) {
  double s = 0.0;
  for (double x : v) s += x;
  for (double& x : v) x /= s;
}

// Phi_t(delta) for every reachable delta_t, unnormalized.
std::map<CommonHistory, Vec> phi_table(const ProblemSpec& spec,
                                       const Design& design, int t,
                                       std::size_t max_paths) {
  const int A = spec.joint_actions();
  std::map<CommonHistory, Vec> out;
  for_each_path(
      spec, design, t,
      [&](const PathPoint& pt) {
        auto& v = out[pt.delta];
        if (v.empty()) v.assign(std::size_t(spec.x_size) * A, 0.0);
        int a = 0;
        for (int k = 0; k < spec.K; ++k) {
          a = a * spec.u_size[k] + pt.u[k][t - 2];
        }
        v[std::size_t(pt.x[t - 2]) * A + a] += pt.p;
      },
      max_paths);
  for (auto& [d, v] : out) normalize(v);
  return out;
}

std::vector<long long> rounded_key(const Vec& v) {
  std::vector<long long> key;
  key.reserve(v.size());
  for (double x : v) key.push_back(std::llround(x / kExactTol));
  return key;
}

}  // namespace

FactorizationReport check_one_step_factorization(const Layout& layout,
                                                 const Design& design,
                                                 const Design& other) {
  const ProblemSpec& spec = layout.spec();
  if (spec.n != 1) {
    throw PreconditionError("one-step factorization requires n = 1");
  }
  FactorizationReport rep;
  for (int t = 1; t <= spec.T; ++t) {
    const StateSpace& st = layout.states(t);
    auto c1 = history_conditionals(layout, design, t);
    auto c2 = history_conditionals(layout, other, t);
    for (const auto& [delta, h] : c1) {
      ++rep.histories;
      for (std::size_t s = 0; s < st.size(); ++s) {
        const int x = st.x_prev(s);
        double expected = h.x_prev[x];
        // With n = 1 the private rank is the current observation.
        for (int k = 0; k < spec.K; ++k) {
          expected *= spec.obs[k][t - 1][x][st.lambda(s, k)];
        }
        rep.max_factor_error =
            std::max(rep.max_factor_error, std::abs(h.joint_state[s] - expected));
      }
      auto it = c2.find(delta);
      if (it != c2.end()) {
        ++rep.shared_histories;
        rep.max_design_gap =
            std::max(rep.max_design_gap, linf(h.x_prev, it->second.x_prev));
      }
    }
  }
  rep.passed = rep.max_factor_error <= kExactTol && rep.max_design_gap <= kExactTol;
  return rep;
}

void require_product_state(const ProblemSpec& spec) {
  std::vector<std::string> broken;
  int product = 1;
  for (int k = 0; k < spec.K; ++k) product *= spec.y_size[k];
  if (product != spec.x_size) {
    broken.push_back("state space is not the product of the observation alphabets");
  } else {
    bool projection = true;
    for (int k = 0; k < spec.K && projection; ++k) {
      int stride = 1;
      for (int j = k + 1; j < spec.K; ++j) stride *= spec.y_size[j];
      for (int t = 0; t < spec.T && projection; ++t) {
        for (int x = 0; x < spec.x_size && projection; ++x) {
          const int digit = (x / stride) % spec.y_size[k];
          for (int y = 0; y < spec.y_size[k]; ++y) {
            if (spec.obs[k][t][x][y] != (y == digit ? 1.0 : 0.0)) projection = false;
          }
        }
      }
    }
    if (!projection) {
      broken.push_back("observations are not the coordinate projections");
    }
  }
  bool deterministic = true;
  for (const auto& per_t : spec.trans) {
    for (const auto& per_x : per_t) {
      for (const auto& row : per_x) {
        for (double p : row) deterministic = deterministic && (p == 0.0 || p == 1.0);
      }
    }
  }
  if (!deterministic) broken.push_back("transitions are not deterministic");
  if (!broken.empty()) {
    std::string msg = "product-state assumptions violated:";
    for (const auto& b : broken) msg += " " + b + ";";
    throw PreconditionError(msg);
  }
}

AicardiReport check_aicardi_degenerate(const Layout& layout,
                                       const GraphBudget& budget) {
  const ProblemSpec& spec = layout.spec();
  require_product_state(spec);
  AicardiReport rep;
  ThetaRGraph g2 = reachable_graph2(layout, budget);
  for (int t = spec.n + 1; t <= spec.T; ++t) {
    std::map<Vec, std::size_t> seen;
    for (std::size_t node = 0; node < g2.nodes[t - 1].size(); ++node) {
      const ThetaRState& s = g2.nodes[t - 1][node];
      ++rep.nodes_checked;
      const auto& p = s.theta.p;
      auto peak = std::max_element(p.begin(), p.end());
      rep.min_peak = std::min(rep.min_peak, *peak);
      ThetaRState probe = s;
      probe.theta.p.assign(p.size(), 0.0);
      probe.theta.p[std::size_t(peak - p.begin())] = 1.0;
      if (!seen.emplace(theta_r_key(probe), node).second) {
        rep.indexed_by_state = false;
      }
    }
  }
  rep.dp1_cost = solve_dp(layout, budget).optimal_cost;
  rep.dp2_cost = solve_dp2(layout, g2).optimal_cost;
  rep.passed = rep.min_peak >= 1.0 - kExactTol && rep.indexed_by_state &&
               std::abs(rep.dp1_cost - rep.dp2_cost) <= 1e-9;
  return rep;
}

Vec kurtaran_phi(const ProblemSpec& spec, const Design& design, int t,
                 const CommonHistory& delta, std::size_t max_paths) {
  const int A = spec.joint_actions();
  Vec v(std::size_t(spec.x_size) * A, 0.0);
  double mass = 0.0;
  for_each_path(
      spec, design, t,
      [&](const PathPoint& pt) {
        if (pt.delta != delta) return;
        int a = 0;
        for (int k = 0; k < spec.K; ++k) a = a * spec.u_size[k] + pt.u[k][t - 2];
        v[std::size_t(pt.x[t - 2]) * A + a] += pt.p;
        mass += pt.p;
      },
      max_paths);
  if (!(mass > 0.0)) {
    throw UnreachableObservation("common history has probability zero");
  }
  for (double& x : v) x /= mass;
  return v;
}

KurtaranReport kurtaran_witness_search(const ProblemSpec& spec,
                                       const Design& design,
                                       std::size_t max_paths) {
  if (spec.n != 2 || spec.K != 2) {
    throw PreconditionError("witness search requires n = 2 and K = 2");
  }
  KurtaranReport rep;
  for (int t = 2; t + 1 <= spec.T; ++t) {
    auto now = phi_table(spec, design, t, max_paths);
    auto next = phi_table(spec, design, t + 1, max_paths);
    rep.histories += now.size();
    std::map<std::vector<long long>, std::vector<const CommonHistory*>> groups;
    for (const auto& [delta, phi] : now) groups[rounded_key(phi)].push_back(&delta);
    rep.groups += groups.size();
    const std::size_t Z = common_obs_count(spec, t + 1);
    for (const auto& [key, members] : groups) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const CommonHistory& d1 = *members[i];
          const CommonHistory& d2 = *members[j];
          if (linf(now.at(d1), now.at(d2)) > kExactTol) continue;
          for (std::size_t z = 0; z < Z; ++z) {
            CommonHistory e1 = d1, e2 = d2;
            e1.push_back(int(z));
            e2.push_back(int(z));
            auto it1 = next.find(e1), it2 = next.find(e2);
            if (it1 == next.end() || it2 == next.end()) continue;
            ++rep.comparisons;
            const double gap = linf(it1->second, it2->second);
            if (gap <= 1e-6) continue;
            KurtaranWitness w;
            w.t = t;
            w.delta = d1;
            w.delta_prime = d2;
            w.z = z;
            w.phi = kurtaran_phi(spec, design, t, d1, max_paths);
            w.phi_other = kurtaran_phi(spec, design, t, d2, max_paths);
            w.phi_prime_1 = kurtaran_phi(spec, design, t + 1, e1, max_paths);
            w.phi_prime_2 = kurtaran_phi(spec, design, t + 1, e2, max_paths);
            w.gap = linf(w.phi_prime_1, w.phi_prime_2);
            w.verified = linf(w.phi, w.phi_other) <= kExactTol && w.gap > 1e-6;
            if (w.verified) {
              rep.witness = std::move(w);
              return rep;
            }
          }
        }
      }
    }
  }
  return rep;
}

Vec random_belief(std::size_t size, std::mt19937_64& rng) {
  Vec v(size, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    if (uniform_index(rng, 4) == 0) continue;
    v[i] = -std::log1p(-uniform01(rng));
    sum += v[i];
  }
  if (!(sum > 0.0)) {
    v[std::size_t(uniform_index(rng, int(size)))] = 1.0;
    sum = 1.0;
  }
  for (double& x : v) x /= sum;
  return v;
}

ConcavityReport concavity_probe(const Layout& layout, std::size_t samples,
                                std::uint64_t seed) {
  const int T = layout.spec().T;
  std::mt19937_64 rng(seed);
  ValueOracle oracle(layout);
  ConcavityReport rep;
  rep.samples = samples;
  rep.min_slack.assign(T, std::numeric_limits<double>::infinity());
  for (int t = 1; t <= T; ++t) {
    const std::size_t S = layout.states(t).size();
    for (std::size_t i = 0; i < samples; ++i) {
      PiBelief a{t, random_belief(S, rng)};
      PiBelief b{t, random_belief(S, rng)};
      const double lam = uniform01(rng);
      PiBelief mix{t, Vec(S)};
      for (std::size_t s = 0; s < S; ++s) {
        mix.p[s] = lam * a.p[s] + (1.0 - lam) * b.p[s];
      }
      const double slack = oracle.value(mix) -
                           (lam * oracle.value(a) + (1.0 - lam) * oracle.value(b));
      rep.min_slack[t - 1] = std::min(rep.min_slack[t - 1], slack);
    }
  }
  rep.worst = samples > 0 ? *std::min_element(rep.min_slack.begin(),
                                              rep.min_slack.end())
                          : 0.0;
  rep.passed = rep.worst >= -1e-9;
  return rep;
}

double alpha_envelope_gap(const Layout& layout, const AlphaSet& alpha,
                          std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ValueOracle oracle(layout);
  double gap = 0.0;
  for (int t = 1; t <= layout.spec().T; ++t) {
    const std::size_t S = layout.states(t).size();
    for (std::size_t i = 0; i < samples; ++i) {
      PiBelief pi{t, random_belief(S, rng)};
      gap = std::max(gap, std::abs(alpha.value(t, pi.p) - oracle.value(pi)));
    }
  }
  return gap;
}

Vec policy_alpha(const Layout& layout, ValueOracle& oracle, const PiBelief& pi) {
  const ProblemSpec& spec = layout.spec();
  const int t = pi.t;
  const StateSpace& st = layout.states(t);
  const std::size_t S = st.size();
  const GammaProfile g = oracle.choice(pi).profile;
  Vec alpha(S, 0.0);
  std::vector<StepKernel> kernels(S);
  for (std::size_t s = 0; s < S; ++s) {
    int a = 0;
    for (int k = 0; k < spec.K; ++k) {
      a = a * spec.u_size[k] + g.tables[k][st.lambda(s, k)];
    }
    alpha[s] = layout.stage_cost(t, st.x_prev(s), a);
    if (t < spec.T) kernels[s] = joint_step_kernel(layout, t, s, g);
  }
  if (t == spec.T) return alpha;

  std::map<std::size_t, std::vector<std::size_t>> by_z;
  for (std::size_t s = 0; s < S; ++s) by_z[kernels[s].z].push_back(s);
  for (const auto& [z, members] : by_z) {
    double mass = 0.0;
    for (std::size_t s : members) mass += pi.p[s];
    PiBelief parent = pi;
    if (!(mass > 0.0)) {
      std::fill(parent.p.begin(), parent.p.end(), 0.0);
      for (std::size_t s : members) parent.p[s] = 1.0 / double(members.size());
    }
    const PiBelief next = belief_update(layout, parent, g, z).next;
    const Vec child = policy_alpha(layout, oracle, next);
    for (std::size_t s : members) {
      for (auto [s2, p] : kernels[s].next) alpha[s] += p * child[s2];
    }
  }
  return alpha;
}

double policy_alpha_envelope_gap(const Layout& layout, std::size_t samples,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ValueOracle oracle(layout);
  double gap = 0.0;
  for (int t = 1; t <= layout.spec().T; ++t) {
    const std::size_t S = layout.states(t).size();
    std::vector<PiBelief> beliefs;
    std::vector<Vec> alphas;
    for (std::size_t i = 0; i < samples; ++i) {
      beliefs.push_back(PiBelief{t, random_belief(S, rng)});
      alphas.push_back(policy_alpha(layout, oracle, beliefs.back()));
    }
    for (const PiBelief& pi : beliefs) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec& a : alphas) {
        double v = 0.0;
        for (std::size_t s = 0; s < S; ++s) v += a[s] * pi.p[s];
        best = std::min(best, v);
      }
      gap = std::max(gap, std::abs(best - oracle.value(pi)));
    }
  }
  return gap;
}

}  // namespace delayshare
