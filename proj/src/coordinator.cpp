#include "delayshare/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "delayshare/errors.hpp"

namespace delayshare {

namespace {

constexpr double kGrid = 1e-8;

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

// Calls f(next_state, prob) for every successor of s under joint action u.
template <typename F>
void for_each_successor(const Layout& layout, int t, std::size_t s,
                        std::span<const int> u, int a, F&& f) {
  const ProblemSpec& spec = layout.spec();
  const StateSpace& st = layout.states(t);
  const StateSpace& st2 = layout.states(t + 1);
  const int K = spec.K;
  const int x = st.x_prev(s);
  const auto& row = spec.trans[t - 1][x][a];
  std::vector<int> y(K, 0);
  std::vector<std::size_t> lam(K);
  for (int x2 = 0; x2 < spec.x_size; ++x2) {
    const double px = row[x2];
    if (px == 0.0) continue;
    std::fill(y.begin(), y.end(), 0);
    while (true) {
      double p = px;
      for (int k = 0; k < K && p != 0.0; ++k) p *= spec.obs[k][t][x2][y[k]];
      if (p != 0.0) {
        for (int k = 0; k < K; ++k) {
          lam[k] = layout.next_lambda(k, t, st.lambda(s, k), u[k], y[k]);
        }
        f(st2.rank(x2, lam), p);
      }
      int k = K - 1;
      for (; k >= 0; --k) {
        if (++y[k] < spec.y_size[k]) break;
        y[k] = 0;
      }
      if (k < 0) break;
    }
  }
}

void check_belief_time(const Layout& layout, const PiBelief& pi, bool step) {
  const int T = layout.spec().T;
  if (pi.t < 1 || pi.t > T || (step && pi.t >= T)) {
    throw DomainError("belief time " + std::to_string(pi.t) + " out of range");
  }
  if (pi.p.size() != layout.states(pi.t).size()) {
    throw DomainError("belief length does not match the joint state space");
  }
}

}  // namespace

PiBelief initial_belief(const Layout& layout) {
  const ProblemSpec& spec = layout.spec();
  const StateSpace& st = layout.states(1);
  PiBelief pi;
  pi.t = 1;
  pi.p.assign(st.size(), 0.0);
  for (std::size_t s = 0; s < st.size(); ++s) {
    const int x = st.x_prev(s);
    double p = spec.x0_dist[x];
    // At t = 1 the window holds only y_1, so the rank is the symbol itself.
    for (int k = 0; k < spec.K; ++k) p *= spec.obs[k][0][x][st.lambda(s, k)];
    pi.p[s] = p;
  }
  return pi;
}

StepKernel joint_step_kernel(const Layout& layout, int t, std::size_t s,
                             const GammaProfile& g) {
  const ProblemSpec& spec = layout.spec();
  if (t < 1 || t >= spec.T) throw DomainError("step time out of range");
  const StateSpace& st = layout.states(t);
  std::vector<int> u(spec.K);
  int a = 0;
  for (int k = 0; k < spec.K; ++k) {
    u[k] = g.tables[k][st.lambda(s, k)];
    a = a * spec.u_size[k] + u[k];
  }
  StepKernel out;
  out.z = layout.revealed_z(t, s, u);
  for_each_successor(layout, t, s, u, a, [&](std::size_t s2, double p) {
    out.next.emplace_back(s2, p);
  });
  std::sort(out.next.begin(), out.next.end());
  return out;
}

BeliefStep belief_update(const Layout& layout, const PiBelief& pi,
                         const GammaProfile& g, std::size_t z) {
  check_belief_time(layout, pi, true);
  const ProblemSpec& spec = layout.spec();
  const int t = pi.t;
  const StateSpace& st = layout.states(t);
  BeliefStep out;
  out.next.t = t + 1;
  out.next.p.assign(layout.states(t + 1).size(), 0.0);
  std::vector<int> u(spec.K);
  for (std::size_t s = 0; s < st.size(); ++s) {
    const double w = pi.p[s];
    if (w == 0.0) continue;
    int a = 0;
    for (int k = 0; k < spec.K; ++k) {
      u[k] = g.tables[k][st.lambda(s, k)];
      a = a * spec.u_size[k] + u[k];
    }
    if (layout.revealed_z(t, s, u) != z) continue;
    for_each_successor(layout, t, s, u, a, [&](std::size_t s2, double p) {
      out.next.p[s2] += w * p;
    });
  }
  double pz = 0.0;
  for (double m : out.next.p) pz += m;
  if (!(pz > 0.0)) {
    throw UnreachableObservation("common observation " + std::to_string(z) +
                                 " has probability zero at t=" +
                                 std::to_string(t + 1));
  }
  for (double& m : out.next.p) m /= pz;
  out.pz = pz;
  return out;
}

double expected_stage_cost(const Layout& layout, const PiBelief& pi,
                           const GammaProfile& g) {
  check_belief_time(layout, pi, false);
  const ProblemSpec& spec = layout.spec();
  const StateSpace& st = layout.states(pi.t);
  double c = 0.0;
  for (std::size_t s = 0; s < st.size(); ++s) {
    if (pi.p[s] == 0.0) continue;
    int a = 0;
    for (int k = 0; k < spec.K; ++k) {
      a = a * spec.u_size[k] + g.tables[k][st.lambda(s, k)];
    }
    c += pi.p[s] * layout.stage_cost(pi.t, st.x_prev(s), a);
  }
  return c;
}

std::uint64_t BeliefIndex::key(const Vec& v, std::uint64_t extra) const {
  std::uint64_t h = mix(0x6a09e667f3bcc909ULL, extra);
  for (double x : v) {
    h = mix(h, std::uint64_t(std::llround(x / kGrid)));
  }
  return h;
}

int BeliefIndex::find(const Vec& v, std::uint64_t extra) const {
  auto it = buckets_.find(key(v, extra));
  if (it == buckets_.end()) return -1;
  for (const auto& [w, id] : it->second) {
    if (w.size() != v.size()) continue;
    bool close = true;
    for (std::size_t i = 0; i < v.size() && close; ++i) {
      close = std::abs(w[i] - v[i]) <= tol_;
    }
    if (close) return id;
  }
  return -1;
}

void BeliefIndex::insert(const Vec& v, int id, std::uint64_t extra) {
  buckets_[key(v, extra)].emplace_back(v, id);
}

std::pair<int, bool> BeliefIndex::intern(const Vec& v, int fresh_id,
                                         std::uint64_t extra) {
  int id = find(v, extra);
  if (id >= 0) return {id, false};
  insert(v, fresh_id, extra);
  return {fresh_id, true};
}

std::size_t BeliefGraph::node_count() const {
  std::size_t n = 0;
  for (const auto& b : beliefs) n += b.size();
  return n;
}

std::size_t BeliefGraph::edge_count() const {
  std::size_t e = 0;
  for (const auto& per_t : child) {
    for (const auto& row : per_t) {
      for (int c : row) e += c >= 0;
    }
  }
  return e;
}

BeliefGraph reachable_graph(const Layout& layout, const GraphBudget& budget) {
  const int T = layout.spec().T;
  BeliefGraph g;
  g.beliefs.resize(T);
  g.class_mass.resize(T);
  g.child.resize(T);
  g.beliefs[0].push_back(initial_belief(layout).p);
  std::size_t nodes = 1, edges = 0;

  for (int t = 1; t <= T; ++t) {
    const Branching& br = layout.branching(t);
    const std::size_t C = br.class_tuples(), R = br.restriction_tuples();
    BeliefIndex index;
    for (std::size_t node = 0; node < g.beliefs[t - 1].size(); ++node) {
      const Vec& b = g.beliefs[t - 1][node];
      g.class_mass[t - 1].push_back(br.class_masses(b));
      if (t == T) continue;
      const Vec& mass = g.class_mass[t - 1].back();
      std::vector<int> row(C * R, -1);
      PiBelief pi{t, b};
      for (std::size_t c = 0; c < C; ++c) {
        if (!(mass[c] > 0.0)) continue;
        for (std::size_t rho = 0; rho < R; ++rho) {
          BeliefStep step =
              belief_update(layout, pi, br.fill(c, rho), br.z_of(c, rho));
          auto& next = g.beliefs[t];
          auto [id, fresh] = index.intern(step.next.p, int(next.size()));
          if (fresh) {
            next.push_back(std::move(step.next.p));
            if (++nodes > budget.max_nodes) {
              throw BudgetExceeded("belief graph nodes", double(nodes),
                                   double(budget.max_nodes));
            }
          }
          row[c * R + rho] = id;
          if (++edges > budget.max_edges) {
            throw BudgetExceeded("belief graph edges", double(edges),
                                 double(budget.max_edges));
          }
        }
      }
      g.child[t - 1].push_back(std::move(row));
    }
  }
  return g;
}

DpSolution solve_branch_graph(
    const Layout& layout, const std::vector<std::vector<Vec>>& beliefs,
    const std::vector<std::vector<Vec>>& class_mass,
    const std::vector<std::vector<std::vector<int>>>& child) {
  const ProblemSpec& spec = layout.spec();
  const int T = spec.T;
  DpSolution sol;
  sol.values.J.resize(T);
  sol.values.argmin.resize(T);
  sol.policy.profiles.resize(T);
  sol.policy.ranks.resize(T);
  sol.children.resize(T);
  sol.pz.resize(T);

  for (int t = T; t >= 1; --t) {
    const Branching& br = layout.branching(t);
    const std::size_t C = br.class_tuples(), R = br.restriction_tuples();
    const std::size_t N = beliefs[t - 1].size();
    const std::size_t Z = t < T ? common_obs_count(spec, t + 1) : 0;
    auto& J = sol.values.J[t - 1];
    J.assign(N, 0.0);
    sol.values.argmin[t - 1].assign(N, 0);
    sol.policy.profiles[t - 1].resize(N);
    sol.policy.ranks[t - 1].assign(N, 0);
    sol.children[t - 1].assign(N, std::vector<int>(Z, -1));
    sol.pz[t - 1].assign(N, Vec(Z, 0.0));

    for (std::size_t node = 0; node < N; ++node) {
      Vec f = br.stage_objective(beliefs[t - 1][node]);
      const Vec& mass = class_mass[t - 1][node];
      if (t < T) {
        const auto& row = child[t - 1][node];
        const Vec& Jn = sol.values.J[t];
        for (std::size_t c = 0; c < C; ++c) {
          if (!(mass[c] > 0.0)) continue;
          for (std::size_t rho = 0; rho < R; ++rho) {
            f[c * R + rho] += mass[c] * Jn[row[c * R + rho]];
          }
        }
      }
      TeamChoice choice = br.minimize(f);
      J[node] = choice.value;
      sol.values.argmin[t - 1][node] = choice.rank;
      sol.policy.ranks[t - 1][node] = choice.rank;
      if (t < T) {
        const auto& row = child[t - 1][node];
        for (std::size_t c = 0; c < C; ++c) {
          if (!(mass[c] > 0.0)) continue;
          std::size_t rho = br.restriction_tuple_of(choice.profile, c);
          std::size_t z = br.z_of(c, rho);
          sol.children[t - 1][node][z] = row[c * R + rho];
          sol.pz[t - 1][node][z] += mass[c];
        }
      }
      sol.policy.profiles[t - 1][node] = std::move(choice.profile);
    }
  }
  sol.optimal_cost = sol.values.J[0][0];
  return sol;
}

DpSolution solve_dp(const Layout& layout, const BeliefGraph& graph) {
  return solve_branch_graph(layout, graph.beliefs, graph.class_mass,
                            graph.child);
}

DpSolution solve_dp(const Layout& layout, const GraphBudget& budget) {
  return solve_dp(layout, reachable_graph(layout, budget));
}

std::unique_ptr<PolicyDesign> extract_design(const Layout& layout,
                                             const DpSolution& solution) {
  return std::make_unique<PolicyDesign>(layout.spec(), solution.policy,
                                        solution.children);
}

ValueOracle::ValueOracle(const Layout& layout, std::size_t max_evaluations)
    : layout_(&layout),
      max_evaluations_(max_evaluations),
      memo_(layout.spec().T) {}

double ValueOracle::value(const PiBelief& pi) {
  auto& memo = memo_[pi.t - 1];
  auto it = memo.find(pi.p);
  if (it != memo.end()) return it->second;
  double v = choice(pi).value;
  memo.emplace(pi.p, v);
  return v;
}

TeamChoice ValueOracle::choice(const PiBelief& pi) {
  check_belief_time(*layout_, pi, false);
  if (++evaluations_ > max_evaluations_) {
    throw BudgetExceeded("value recursion evaluations", double(evaluations_),
                         double(max_evaluations_));
  }
  const int t = pi.t;
  const Branching& br = layout_->branching(t);
  Vec f = br.stage_objective(pi.p);
  if (t < layout_->spec().T) {
    const std::size_t C = br.class_tuples(), R = br.restriction_tuples();
    Vec mass = br.class_masses(pi.p);
    for (std::size_t c = 0; c < C; ++c) {
      if (!(mass[c] > 0.0)) continue;
      for (std::size_t rho = 0; rho < R; ++rho) {
        BeliefStep step =
            belief_update(*layout_, pi, br.fill(c, rho), br.z_of(c, rho));
        f[c * R + rho] += step.pz * value(step.next);
      }
    }
  }
  return br.minimize(f);
}

double AlphaSet::value(int t, const Vec& pi) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& a : vectors.at(t - 1)) {
    double v = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * pi[i];
    best = std::min(best, v);
  }
  return best;
}

std::vector<Vec> prune_dominated(std::vector<Vec> vs) {
  const std::size_t n = vs.size();
  std::vector<char> keep(n, 1);
  auto dominates = [](const Vec& w, const Vec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (w[i] > v[i]) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n && keep[i]; ++j) {
      if (i == j || !keep[j]) continue;
      // Equal vectors: the earlier one survives.
      if (dominates(vs[j], vs[i]) && (vs[j] != vs[i] || j < i)) keep[i] = 0;
    }
  }
  std::vector<Vec> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) out.push_back(std::move(vs[i]));
  }
  return out;
}

AlphaSet alpha_backup(const Layout& layout, std::size_t max_candidates) {
  const ProblemSpec& spec = layout.spec();
  const int T = spec.T;
  AlphaSet out;
  out.vectors.resize(T);

  for (int t = T; t >= 1; --t) {
    const StateSpace& st = layout.states(t);
    const std::size_t S = st.size();
    const double profiles = double(profile_count(spec, t));
    if (profiles > double(max_candidates)) {
      throw BudgetExceeded("alpha candidates at t=" + std::to_string(t),
                           profiles, double(max_candidates));
    }
    std::vector<Vec> candidates;
    for_each_profile(spec, t, [&](const GammaProfile& g) {
      Vec stage(S, 0.0);
      std::vector<StepKernel> kernels;
      std::vector<std::size_t> zs;
      for (std::size_t s = 0; s < S; ++s) {
        int a = 0;
        for (int k = 0; k < spec.K; ++k) {
          a = a * spec.u_size[k] + g.tables[k][st.lambda(s, k)];
        }
        stage[s] = layout.stage_cost(t, st.x_prev(s), a);
      }
      if (t == T) {
        candidates.push_back(std::move(stage));
        return true;
      }
      for (std::size_t s = 0; s < S; ++s) {
        kernels.push_back(joint_step_kernel(layout, t, s, g));
        zs.push_back(kernels.back().z);
      }
      std::vector<std::size_t> zlist(zs);
      std::sort(zlist.begin(), zlist.end());
      zlist.erase(std::unique(zlist.begin(), zlist.end()), zlist.end());

      // Projected vectors per revealed z live on disjoint supports, so the
      // pruned cross-sum is the product of the per-z pruned sets.
      std::vector<std::vector<Vec>> parts;
      double combos = 1.0;
      for (std::size_t z : zlist) {
        std::vector<Vec> proj;
        for (const Vec& alpha : out.vectors[t]) {
          Vec v(S, 0.0);
          for (std::size_t s = 0; s < S; ++s) {
            if (zs[s] != z) continue;
            double acc = 0.0;
            for (auto [s2, p] : kernels[s].next) acc += p * alpha[s2];
            v[s] = acc;
          }
          proj.push_back(std::move(v));
        }
        parts.push_back(prune_dominated(std::move(proj)));
        combos *= double(parts.back().size());
      }
      if (double(candidates.size()) + combos > double(max_candidates)) {
        throw BudgetExceeded("alpha candidates at t=" + std::to_string(t),
                             double(candidates.size()) + combos,
                             double(max_candidates));
      }
      std::vector<std::size_t> pick(parts.size(), 0);
      while (true) {
        Vec v = stage;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          const Vec& w = parts[i][pick[i]];
          for (std::size_t s = 0; s < S; ++s) v[s] += w[s];
        }
        candidates.push_back(std::move(v));
        std::size_t i = parts.size();
        while (i-- > 0) {
          if (++pick[i] < parts[i].size()) break;
          pick[i] = 0;
        }
        if (i == std::size_t(-1)) break;
      }
      return true;
    });
    out.vectors[t - 1] = prune_dominated(std::move(candidates));
  }
  return out;
}

}  // namespace delayshare
