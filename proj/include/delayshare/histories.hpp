#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "delayshare/model.hpp"

namespace delayshare {

/// Dense mixed-radix index over a window (y_1..y_ny, u_1..u_nu) of one
/// controller. The y block is more significant than the u block and earlier
/// entries are more significant within each block.
struct WindowSpace {
  int y_card = 1;
  int u_card = 1;
  int ny = 0;
  int nu = 0;

  std::size_t size() const;
  std::size_t encode(std::span<const int> ys, std::span<const int> us) const;
  void decode(std::size_t rank, std::vector<int>& ys,
              std::vector<int>& us) const;
};

/// Layout of the private information space of controller k (0-based) at t.
WindowSpace private_layout(const ProblemSpec& spec, int k, int t);

struct PrivateInfo {
  int k = 0;
  int t = 1;
  std::vector<int> y_seq;
  std::vector<int> u_seq;
  std::size_t rank = 0;
};

/// Every realization of Lambda^k_t in rank order.
std::vector<PrivateInfo> private_space(const ProblemSpec& spec, int k, int t);

/// New common observation Z_t = (Y^{1:K}_{t-n}, U^{1:K}_{t-n}); null when
/// t <= n.
struct CommonObs {
  int t = 2;
  bool null = true;
  std::vector<int> y;
  std::vector<int> u;
  std::size_t rank = 0;
};

std::size_t common_obs_count(const ProblemSpec& spec, int t);
std::size_t common_obs_rank(const ProblemSpec& spec, std::span<const int> ys,
                            std::span<const int> us);
CommonObs common_obs(const ProblemSpec& spec, int t, std::size_t rank);
std::vector<CommonObs> common_obs_space(const ProblemSpec& spec, int t);

/// Common history delta_t as the ranks of z_{n+1}, ..., z_t.
using CommonHistory = std::vector<int>;

/// |D_t|: number of common histories at t.
double common_history_count(const ProblemSpec& spec, int t);
std::size_t common_history_rank(const ProblemSpec& spec, int t,
                                std::span<const int> delta);
CommonHistory common_history(const ProblemSpec& spec, int t,
                             std::size_t rank);

struct PartialFunction {
  int k = 0;
  int t = 1;
  std::vector<int> table;
};

/// Joint prescription (gamma^1_t, ..., gamma^K_t). tables[k][lambda rank] is
/// the action of controller k.
struct GammaProfile {
  int t = 1;
  std::vector<std::vector<int>> tables;

  bool operator==(const GammaProfile&) const = default;
};

/// Number of profiles at t; throws BudgetExceeded beyond 2^63.
std::uint64_t profile_count(const ProblemSpec& spec, int t);

/// Rank with controller 1's table most significant and table entry 0 most
/// significant within a table.
std::uint64_t profile_rank(const ProblemSpec& spec, const GammaProfile& g);
GammaProfile profile_at(const ProblemSpec& spec, int t, std::uint64_t rank);

/// Visit every profile at t in rank order. Return false from fn to stop.
void for_each_profile(const ProblemSpec& spec, int t,
                      const std::function<bool(const GammaProfile&)>& fn);

/// u^k = gamma^k(lambda^k).
JointAction apply_profile(const ProblemSpec& spec, const GammaProfile& g,
                          std::span<const std::size_t> lambda);

/// How the next common observation Z_{t+1} partitions Lambda^k_t.
///
/// Z_{t+1} reveals the oldest stage of the window. Private realizations that
/// agree on it form a class; the restriction of gamma^k_t to a class is a
/// table over the remaining entries, in the same order as the curried window.
/// With n = 1 each realization is its own class and the revealed action is
/// the prescribed one. Before any sharing (t < n) there is a single class.
struct RevealSplit {
  enum class Kind { kNothing, kAction, kPrefix };

  Kind kind = Kind::kNothing;
  int classes = 1;
  int entries = 1;
  std::size_t restrictions = 1;
  std::vector<int> class_of;  // by lambda rank
  std::vector<int> entry_of;  // by lambda rank
  std::vector<std::vector<std::size_t>> members;  // class -> lambda ranks
  std::vector<int> class_y;  // revealed y per class (kAction, kPrefix)
  std::vector<int> class_u;  // revealed u per class (kPrefix)
  int u_card = 1;

  int action(std::size_t restriction, int entry) const;
  std::size_t restriction_of(std::span<const int> table, int cls) const;
};

RevealSplit reveal_split(const ProblemSpec& spec, int k, int t);

/// A design g: the action of every controller as a function of its private
/// information and the common history. prescription(t, delta) is the profile
/// the coordinator would announce, gamma^k_t(.) = g^k_t(., delta).
class Design {
 public:
  virtual ~Design() = default;
  virtual GammaProfile prescription(int t, std::span<const int> delta) const = 0;

  int act(int k, int t, std::size_t lambda, std::span<const int> delta) const {
    return prescription(t, delta).tables[k][lambda];
  }
};

/// Fully tabulated design; laws[k][t-1][delta rank][lambda rank].
class ExtensionalDesign : public Design {
 public:
  ExtensionalDesign(const ProblemSpec& spec,
                    std::vector<std::vector<std::vector<std::vector<int>>>> laws);

  GammaProfile prescription(int t, std::span<const int> delta) const override;

  const std::vector<std::vector<std::vector<std::vector<int>>>>& laws() const {
    return laws_;
  }

 private:
  int n_;
  std::size_t z_card_;
  std::vector<std::vector<std::vector<std::vector<int>>>> laws_;
};

/// Coordinator decision rules on the nodes of a reachable information-state
/// graph.
struct CoordinatorPolicy {
  std::vector<std::vector<GammaProfile>> profiles;  // [t-1][node]
  std::vector<std::vector<std::uint64_t>> ranks;    // [t-1][node]
};

/// Design that replays the coordinator along the common history: starting
/// from the root node it follows the child reached by each revealed z.
/// children[t-1][node][z rank] is the node at t+1, or -1 when z cannot occur.
class PolicyDesign : public Design {
 public:
  PolicyDesign(const ProblemSpec& spec, CoordinatorPolicy policy,
               std::vector<std::vector<std::vector<int>>> children);

  GammaProfile prescription(int t, std::span<const int> delta) const override;

  /// Node visited at time t along delta; throws OffDesignHistory.
  int node_at(int t, std::span<const int> delta) const;

  const CoordinatorPolicy& policy() const { return policy_; }
  const std::vector<std::vector<std::vector<int>>>& children() const {
    return children_;
  }

 private:
  int n_;
  int T_;
  CoordinatorPolicy policy_;
  std::vector<std::vector<std::vector<int>>> children_;
};

/// Design driven by a seeded hash of (t, delta): a reproducible random
/// coordination strategy that never materializes its tables.
class HashedDesign : public Design {
 public:
  HashedDesign(const ProblemSpec& spec, std::uint64_t seed);
  GammaProfile prescription(int t, std::span<const int> delta) const override;

 private:
  int n_;
  std::vector<int> u_size_;
  std::vector<std::vector<std::size_t>> private_sizes_;  // [k][t-1]
  std::uint64_t seed_;
};

}  // namespace delayshare
