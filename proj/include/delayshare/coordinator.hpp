#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "delayshare/histories.hpp"
#include "delayshare/layout.hpp"
#include "delayshare/model.hpp"

namespace delayshare {

/// Coordinator belief over the joint state S_t, indexed by StateSpace rank.
struct PiBelief {
  int t = 1;
  Vec p;
};

PiBelief initial_belief(const Layout& layout);

/// One step of the joint state under a prescription: the revealed Z_{t+1}
/// (deterministic given s and gamma) and the distribution of S_{t+1}.
struct StepKernel {
  std::size_t z = 0;
  std::vector<std::pair<std::size_t, double>> next;  // sorted by state rank
};

StepKernel joint_step_kernel(const Layout& layout, int t, std::size_t s,
                             const GammaProfile& g);

struct BeliefStep {
  PiBelief next;
  double pz = 0.0;
};

/// Bayes update of pi_t after announcing g and observing z = Z_{t+1}.
/// Throws UnreachableObservation when z has probability zero.
BeliefStep belief_update(const Layout& layout, const PiBelief& pi,
                         const GammaProfile& g, std::size_t z);

double expected_stage_cost(const Layout& layout, const PiBelief& pi,
                           const GammaProfile& g);

/// Near-duplicate lookup for probability vectors: a hash on a coarse grid
/// followed by an L-infinity check against every vector in the bucket.
class BeliefIndex {
 public:
  explicit BeliefIndex(double tol = 1e-9) : tol_(tol) {}
  /// Id of a stored vector within tol of v, or -1.
  int find(const Vec& v, std::uint64_t extra = 0) const;
  void insert(const Vec& v, int id, std::uint64_t extra = 0);
  /// Stored id if present, otherwise registers v under fresh_id.
  std::pair<int, bool> intern(const Vec& v, int fresh_id,
                              std::uint64_t extra = 0);

 private:
  std::uint64_t key(const Vec& v, std::uint64_t extra) const;
  double tol_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<Vec, int>>> buckets_;
};

struct GraphBudget {
  std::size_t max_nodes = 2'000'000;
  std::size_t max_edges = 50'000'000;
};

/// Forward closure of the beliefs reachable under every prescription.
///
/// Branch edges are stored once per (node, class tuple, restriction tuple):
/// the child reached from a node through z depends on a profile only through
/// its restriction to the class tuple that z reveals, so these edges cover
/// every (profile, z) pair.
struct BeliefGraph {
  std::vector<std::vector<Vec>> beliefs;           // [t-1][node]
  std::vector<std::vector<Vec>> class_mass;        // [t-1][node][c]
  std::vector<std::vector<std::vector<int>>> child;  // [t-1][node][c*R+rho]

  std::size_t node_count() const;
  std::size_t edge_count() const;
};

BeliefGraph reachable_graph(const Layout& layout, const GraphBudget& budget = {});

struct ValueTable {
  std::vector<Vec> J;                               // [t-1][node]
  std::vector<std::vector<std::uint64_t>> argmin;   // [t-1][node]
};

struct DpSolution {
  ValueTable values;
  CoordinatorPolicy policy;
  /// children[t-1][node][z] under the policy's own profile, -1 if z cannot occur.
  std::vector<std::vector<std::vector<int>>> children;
  /// pz[t-1][node][z] matching children.
  std::vector<std::vector<Vec>> pz;
  double optimal_cost = 0.0;
};

/// Backward induction over any graph with branch edges. beliefs[t-1][node]
/// is the coordinator belief on S_t represented by the node.
DpSolution solve_branch_graph(
    const Layout& layout, const std::vector<std::vector<Vec>>& beliefs,
    const std::vector<std::vector<Vec>>& class_mass,
    const std::vector<std::vector<std::vector<int>>>& child);

DpSolution solve_dp(const Layout& layout, const BeliefGraph& graph);
DpSolution solve_dp(const Layout& layout, const GraphBudget& budget = {});

std::unique_ptr<PolicyDesign> extract_design(const Layout& layout,
                                             const DpSolution& solution);

/// J_t at an arbitrary belief by direct recursion, memoized on the exact
/// belief vector.
class ValueOracle {
 public:
  explicit ValueOracle(const Layout& layout, std::size_t max_evaluations =
                                                 50'000'000);
  double value(const PiBelief& pi);
  TeamChoice choice(const PiBelief& pi);
  std::size_t evaluations() const { return evaluations_; }

 private:
  const Layout* layout_;
  std::size_t max_evaluations_;
  std::size_t evaluations_ = 0;
  std::vector<std::map<Vec, double>> memo_;
};

/// Lower envelope representation of J_t: J_t(pi) = min over alpha of <alpha, pi>.
struct AlphaSet {
  std::vector<std::vector<Vec>> vectors;  // [t-1]

  double value(int t, const Vec& pi) const;
};

/// Exact backup with pointwise-domination pruning. max_candidates bounds the
/// number of vectors considered at any stage before pruning.
AlphaSet alpha_backup(const Layout& layout,
                      std::size_t max_candidates = 20'000);

/// Keep vectors not weakly dominated by an earlier-kept or later vector.
std::vector<Vec> prune_dominated(std::vector<Vec> vs);

}  // namespace delayshare
