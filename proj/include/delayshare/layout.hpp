#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "delayshare/histories.hpp"
#include "delayshare/model.hpp"

namespace delayshare {

/// Dense index over S_t = X_{t-1} x Lambda^1_t x ... x Lambda^K_t, with
/// x_prev most significant and controller 1 next.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(const ProblemSpec& spec, int t);

  int t() const { return t_; }
  std::size_t size() const { return x_of_.size(); }
  int x_prev(std::size_t s) const { return x_of_[s]; }
  std::size_t lambda(std::size_t s, int k) const { return lam_[s * K_ + k]; }
  std::span<const std::size_t> lambdas(std::size_t s) const {
    return {lam_.data() + s * K_, std::size_t(K_)};
  }
  std::size_t rank(int x_prev, std::span<const std::size_t> lambdas) const;
  std::size_t private_size(int k) const { return private_sizes_[k]; }

 private:
  int t_ = 1;
  int K_ = 1;
  std::vector<std::size_t> private_sizes_;
  std::vector<int> x_of_;
  std::vector<std::size_t> lam_;
};

struct TeamChoice {
  double value = 0.0;
  GammaProfile profile;
  std::uint64_t rank = 0;
};

/// Structure of the coordinator's choice at time t.
///
/// Every private realization of controller k falls in one class of the
/// RevealSplit; a class tuple fixes one class per controller and a
/// restriction tuple fixes gamma^k_t on those classes. Any objective that is a
/// sum over class tuples of terms depending only on the matching restrictions
/// (stage cost plus probability-weighted continuation value) is minimized
/// over all profiles by minimize().
class Branching {
 public:
  Branching() = default;
  Branching(const ProblemSpec& spec, const StateSpace& states, int t);

  std::size_t class_tuples() const { return class_tuples_; }
  std::size_t restriction_tuples() const { return restriction_tuples_; }
  const RevealSplit& split(int k) const { return splits_[k]; }

  std::size_t class_tuple_of_state(std::size_t s) const {
    return state_class_[s];
  }
  int class_of(std::size_t class_tuple, int k) const;
  std::size_t restriction_of(std::size_t restriction_tuple, int k) const;

  /// Rank of Z_{t+1} revealed when the state lies in class tuple c and the
  /// coordinator applies restriction tuple rho there. 0 when t < n.
  std::size_t z_of(std::size_t c, std::size_t rho) const;

  /// A profile whose restriction on class tuple c is rho (other entries 0).
  GammaProfile fill(std::size_t c, std::size_t rho) const;
  std::size_t restriction_tuple_of(const GammaProfile& g, std::size_t c) const;

  /// Probability of each class tuple under a belief on S_t.
  Vec class_masses(std::span<const double> belief) const;

  /// f[c * R + rho] = sum over states in c of belief(s) * expected stage cost.
  Vec stage_objective(std::span<const double> belief) const;

  TeamChoice minimize(std::span<const double> objective) const;

 private:
  const ProblemSpec* spec_ = nullptr;
  const StateSpace* states_ = nullptr;
  int t_ = 1;
  std::vector<RevealSplit> splits_;
  std::vector<std::size_t> class_stride_;
  std::vector<std::size_t> restriction_stride_;
  std::size_t class_tuples_ = 1;
  std::size_t restriction_tuples_ = 1;
  std::vector<std::size_t> state_class_;
  std::vector<std::size_t> private_sizes_;
  std::vector<double> stage_cost_;  // [x_prev * A + a]
};

/// Precomputed indices and kernels for one instance. Immutable after
/// construction and safe to share between threads. Not copyable: the
/// branchings refer back into it.
class Layout {
 public:
  explicit Layout(ProblemSpec spec);
  Layout(const Layout&) = delete;
  Layout& operator=(const Layout&) = delete;

  const ProblemSpec& spec() const { return spec_; }
  const StateSpace& states(int t) const { return states_[t - 1]; }
  const Branching& branching(int t) const { return branchings_[t - 1]; }
  const WindowSpace& private_window(int k, int t) const {
    return windows_[k][t - 1];
  }

  /// Expected cost of stage t from x_prev under joint action a, summed over
  /// the post-transition state.
  double stage_cost(int t, int x_prev, int a) const {
    return stage_cost_[t - 1][std::size_t(x_prev) * spec_.joint_actions() + a];
  }

  /// Lambda^k_{t+1} rank after applying u and observing y at t+1.
  std::size_t next_lambda(int k, int t, std::size_t lambda, int u,
                          int y) const {
    return next_lambda_[k][t - 1]
                       [(lambda * spec_.u_size[k] + u) * spec_.y_size[k] + y];
  }
  /// Oldest observation in the window, revealed by Z_{t+1} (t >= n).
  int oldest_y(int k, int t, std::size_t lambda) const {
    return oldest_y_[k][t - 1][lambda];
  }
  /// Oldest action in the window (t >= n, n >= 2).
  int oldest_u(int k, int t, std::size_t lambda) const {
    return oldest_u_[k][t - 1][lambda];
  }

  /// Rank of Z_{t+1} produced by state s at t under joint action u.
  std::size_t revealed_z(int t, std::size_t s, std::span<const int> u) const;

 private:
  ProblemSpec spec_;
  std::vector<StateSpace> states_;
  std::vector<Branching> branchings_;
  std::vector<std::vector<WindowSpace>> windows_;
  std::vector<Vec> stage_cost_;
  std::vector<std::vector<std::vector<std::size_t>>> next_lambda_;
  std::vector<std::vector<std::vector<int>>> oldest_y_;
  std::vector<std::vector<std::vector<int>>> oldest_u_;
};

}  // namespace delayshare
