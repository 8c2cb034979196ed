#include "delayshare/second_form.hpp"

#include <algorithm>
#include <functional>

#include "delayshare/errors.hpp"

namespace delayshare {

namespace {

// Fix the oldest (y, u) of a table over (y_{lo..m}, u_{lo..m-1}).
std::vector<int> curry(std::span<const int> table, const WindowSpace& dom,
                       int y0, int u0) {
  if (dom.ny < 1 || dom.nu < 1 || table.size() != dom.size()) {
    throw std::logic_error("r part domain does not admit the revealed pair");
  }
  WindowSpace rest{dom.y_card, dom.u_card, dom.ny - 1, dom.nu - 1};
  std::vector<int> out(rest.size());
  std::vector<int> ys, us;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    rest.decode(i, ys, us);
    ys.insert(ys.begin(), y0);
    us.insert(us.begin(), u0);
    out[i] = table[dom.encode(ys, us)];
  }
  return out;
}

}  // namespace

WindowSpace r_part_domain(const ProblemSpec& spec, int k, int t, int m) {
  const int lo = std::max(1, t - spec.n + 1);
  if (m < lo || m > t) throw DomainError("r part index out of range");
  return WindowSpace{spec.y_size[k], spec.u_size[k], m - lo + 1, m - lo};
}

ThetaRState initial_theta_r(const ProblemSpec& spec) {
  ThetaRState s;
  s.theta = Theta{1, spec.x0_dist};
  for (int k = 0; k < spec.K; ++k) s.r.push_back(RSuffix{k, 1, 1, {}});
  return s;
}

Theta theta_update(const ProblemSpec& spec, const Theta& theta,
                   std::size_t z) {
  const int t = theta.t;
  if (t < 1 || t >= spec.T) throw DomainError("theta time out of range");
  if (t + 1 <= spec.n) return Theta{t + 1, theta.p};
  const int tau = t - spec.n + 1;
  CommonObs co = common_obs(spec, t + 1, z);
  Vec post(spec.x_size, 0.0);
  double norm = 0.0;
  for (int x = 0; x < spec.x_size; ++x) {
    double p = theta.p[x];
    for (int k = 0; k < spec.K && p != 0.0; ++k) {
      p *= spec.obs[k][tau - 1][x][co.y[k]];
    }
    post[x] = p;
    norm += p;
  }
  if (!(norm > 0.0)) {
    throw UnreachableObservation("revealed observations have probability zero");
  }
  const int a = joint_action_index(spec, co.u);
  Theta out{t + 1, Vec(spec.x_size, 0.0)};
  for (int x = 0; x < spec.x_size; ++x) {
    if (post[x] == 0.0) continue;
    const double w = post[x] / norm;
    const auto& row = spec.trans[tau - 1][x][a];
    for (int x2 = 0; x2 < spec.x_size; ++x2) out.p[x2] += w * row[x2];
  }
  return out;
}

RSuffix r_update(const ProblemSpec& spec, const RSuffix& r,
                 std::span<const int> gamma, std::size_t z) {
  const int t = r.t, k = r.k, n = spec.n;
  if (t < 1 || t >= spec.T) throw DomainError("r time out of range");
  if (gamma.size() != private_layout(spec, k, t).size()) {
    throw DomainError("prescription table size mismatch");
  }
  RSuffix out{k, t + 1, 1, {}};
  if (t + 1 <= n) {
    out.parts = r.parts;
    out.parts.emplace_back(gamma.begin(), gamma.end());
    return out;
  }
  CommonObs co = common_obs(spec, t + 1, z);
  const int y0 = co.y[k], u0 = co.u[k];
  const int lo = t - n + 1;
  out.first_m = t - n + 2;
  for (std::size_t i = 0; i < r.parts.size(); ++i) {
    const int m = r.first_m + int(i);
    if (m <= lo) continue;
    out.parts.push_back(curry(r.parts[i], r_part_domain(spec, k, t, m), y0, u0));
  }
  if (n >= 2) {
    out.parts.push_back(curry(gamma, r_part_domain(spec, k, t, t), y0, u0));
  }
  return out;
}

ThetaRState theta_r_update(const ProblemSpec& spec, const ThetaRState& state,
                           const GammaProfile& g, std::size_t z) {
  ThetaRState out;
  out.theta = theta_update(spec, state.theta, z);
  for (int k = 0; k < spec.K; ++k) {
    out.r.push_back(r_update(spec, state.r[k], g.tables[k], z));
  }
  return out;
}

PiBelief h_map(const Layout& layout, const ThetaRState& state) {
  const ProblemSpec& spec = layout.spec();
  const int t = state.t();
  const int K = spec.K;
  const int lo = std::max(1, t - spec.n + 1);
  for (const auto& r : state.r) {
    if (r.t != t || (!r.parts.empty() && r.first_m != lo) ||
        int(r.parts.size()) != t - lo) {
      throw DomainError("r suffix inconsistent with time " + std::to_string(t));
    }
  }
  const StateSpace& st = layout.states(t);
  PiBelief pi{t, Vec(st.size(), 0.0)};

  std::vector<std::vector<int>> ys(K), us(K);
  std::vector<int> u(K);
  std::vector<std::size_t> lam(K);

  // Stage m: draw Y_m from X_{m-1} = x; before t also apply r and move X.
  std::function<void(int, int, double)> stage = [&](int m, int x, double w) {
    std::vector<int> ycur(K, 0);
    while (true) {
      double p = w;
      for (int k = 0; k < K && p != 0.0; ++k) {
        p *= spec.obs[k][m - 1][x][ycur[k]];
      }
      if (p != 0.0) {
        for (int k = 0; k < K; ++k) ys[k].push_back(ycur[k]);
        if (m == t) {
          for (int k = 0; k < K; ++k) {
            lam[k] = layout.private_window(k, t).encode(ys[k], us[k]);
          }
          pi.p[st.rank(x, lam)] += p;
        } else {
          int a = 0;
          for (int k = 0; k < K; ++k) {
            const auto& part = state.r[k].parts[m - lo];
            WindowSpace dom = r_part_domain(spec, k, t, m);
            u[k] = part[dom.encode(ys[k], us[k])];
            a = a * spec.u_size[k] + u[k];
          }
          std::vector<int> ucur(u);
          for (int k = 0; k < K; ++k) us[k].push_back(ucur[k]);
          const auto& row = spec.trans[m - 1][x][a];
          for (int x2 = 0; x2 < spec.x_size; ++x2) {
            if (row[x2] != 0.0) stage(m + 1, x2, p * row[x2]);
          }
          for (int k = 0; k < K; ++k) us[k].pop_back();
        }
        for (int k = 0; k < K; ++k) ys[k].pop_back();
      }
      int k = K - 1;
      for (; k >= 0; --k) {
        if (++ycur[k] < spec.y_size[k]) break;
        ycur[k] = 0;
      }
      if (k < 0) break;
    }
  };

  for (int x = 0; x < spec.x_size; ++x) {
    if (state.theta.p[x] != 0.0) stage(lo, x, state.theta.p[x]);
  }
  return pi;
}

Vec theta_r_key(const ThetaRState& state) {
  Vec key = state.theta.p;
  for (const auto& r : state.r) {
    for (const auto& part : r.parts) {
      for (int a : part) key.push_back(double(a));
    }
  }
  return key;
}

std::size_t ThetaRGraph::node_count() const {
  std::size_t n = 0;
  for (const auto& v : nodes) n += v.size();
  return n;
}

std::size_t ThetaRGraph::edge_count() const {
  std::size_t e = 0;
  for (const auto& per_t : child) {
    for (const auto& row : per_t) {
      for (int c : row) e += c >= 0;
    }
  }
  return e;
}

ThetaRGraph reachable_graph2(const Layout& layout, const GraphBudget& budget) {
  const ProblemSpec& spec = layout.spec();
  const int T = spec.T;
  ThetaRGraph g;
  g.nodes.resize(T);
  g.pi.resize(T);
  g.class_mass.resize(T);
  g.child.resize(T);
  g.nodes[0].push_back(initial_theta_r(spec));
  g.pi[0].push_back(h_map(layout, g.nodes[0][0]).p);
  std::size_t nodes = 1, edges = 0;

  for (int t = 1; t <= T; ++t) {
    const Branching& br = layout.branching(t);
    const std::size_t C = br.class_tuples(), R = br.restriction_tuples();
    BeliefIndex index;
    for (std::size_t node = 0; node < g.nodes[t - 1].size(); ++node) {
      g.class_mass[t - 1].push_back(br.class_masses(g.pi[t - 1][node]));
      if (t == T) continue;
      const Vec& mass = g.class_mass[t - 1].back();
      std::vector<int> row(C * R, -1);
      for (std::size_t c = 0; c < C; ++c) {
        if (!(mass[c] > 0.0)) continue;
        for (std::size_t rho = 0; rho < R; ++rho) {
          ThetaRState next = theta_r_update(spec, g.nodes[t - 1][node],
                                            br.fill(c, rho), br.z_of(c, rho));
          auto& level = g.nodes[t];
          auto [id, fresh] =
              index.intern(theta_r_key(next), int(level.size()));
          if (fresh) {
            g.pi[t].push_back(h_map(layout, next).p);
            level.push_back(std::move(next));
            if (++nodes > budget.max_nodes) {
              throw BudgetExceeded("information-state graph nodes",
                                   double(nodes), double(budget.max_nodes));
            }
          }
          row[c * R + rho] = id;
          if (++edges > budget.max_edges) {
            throw BudgetExceeded("information-state graph edges",
                                 double(edges), double(budget.max_edges));
          }
        }
      }
      g.child[t - 1].push_back(std::move(row));
    }
  }
  return g;
}

DpSolution solve_dp2(const Layout& layout, const ThetaRGraph& graph) {
  return solve_branch_graph(layout, graph.pi, graph.class_mass, graph.child);
}

DpSolution solve_dp2(const Layout& layout, const GraphBudget& budget) {
  return solve_dp2(layout, reachable_graph2(layout, budget));
}

std::unique_ptr<PolicyDesign> extract_design2(const Layout& layout,
                                              const DpSolution& solution) {
  return std::make_unique<PolicyDesign>(layout.spec(), solution.policy,
                                        solution.children);
}

}  // namespace delayshare
