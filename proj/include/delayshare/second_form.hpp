#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "delayshare/coordinator.hpp"
#include "delayshare/histories.hpp"
#include "delayshare/layout.hpp"
#include "delayshare/model.hpp"

namespace delayshare {

/// Belief on X_{t-n} given the common history (on X_0 while t <= n).
struct Theta {
  int t = 1;
  Vec p;
};

/// Partially applied past prescriptions of one controller.
///
/// parts[i] is the law for m = first_m + i, m < t, tabulated over
/// (y_{lo..m}, u_{lo..m-1}) with lo = max(1, t-n+1) in WindowSpace order.
/// Empty when n = 1.
struct RSuffix {
  int k = 0;
  int t = 1;
  int first_m = 1;
  std::vector<std::vector<int>> parts;

  bool operator==(const RSuffix&) const = default;
};

struct ThetaRState {
  Theta theta;
  std::vector<RSuffix> r;  // one per controller

  int t() const { return theta.t; }
};

/// Domain of part m of an r suffix held at time t.
WindowSpace r_part_domain(const ProblemSpec& spec, int k, int t, int m);

ThetaRState initial_theta_r(const ProblemSpec& spec);

/// Theta_{t+1} from Theta_t and z = Z_{t+1}. Throws UnreachableObservation
/// when the revealed observations have probability zero under theta.
Theta theta_update(const ProblemSpec& spec, const Theta& theta, std::size_t z);

/// r^k_{t+1} from r^k_t, gamma^k_t (table over Lambda^k_t) and z.
RSuffix r_update(const ProblemSpec& spec, const RSuffix& r,
                 std::span<const int> gamma, std::size_t z);

ThetaRState theta_r_update(const ProblemSpec& spec, const ThetaRState& state,
                           const GammaProfile& g, std::size_t z);

/// The coordinator belief on S_t implied by (Theta_t, r_t): forward
/// summation from theta through the stages whose prescriptions r records.
PiBelief h_map(const Layout& layout, const ThetaRState& state);

/// Dedup key: theta followed by every r table entry.
Vec theta_r_key(const ThetaRState& state);

struct ThetaRGraph {
  std::vector<std::vector<ThetaRState>> nodes;   // [t-1][node]
  std::vector<std::vector<Vec>> pi;              // h_map of each node
  std::vector<std::vector<Vec>> class_mass;      // [t-1][node][c]
  std::vector<std::vector<std::vector<int>>> child;  // [t-1][node][c*R+rho]

  std::size_t node_count() const;
  std::size_t edge_count() const;
};

ThetaRGraph reachable_graph2(const Layout& layout,
                             const GraphBudget& budget = {});

DpSolution solve_dp2(const Layout& layout, const ThetaRGraph& graph);
DpSolution solve_dp2(const Layout& layout, const GraphBudget& budget = {});

std::unique_ptr<PolicyDesign> extract_design2(const Layout& layout,
                                              const DpSolution& solution);

}  // namespace delayshare
