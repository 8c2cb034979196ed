#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace delayshare {

using Vec = std::vector<double>;

/// A finite decentralized control problem with n-step delayed sharing.
///
/// Time runs over t = 1..T and time t lives at array index t-1. The
/// observation Y^k_t is drawn from obs[k][t-1][X_{t-1}] and the cost of stage
/// t is charged on the post-transition state X_t. Joint actions are flattened
/// in row-major order with controller 1 as the most significant digit.
struct ProblemSpec {
  int K = 1;
  int T = 1;
  int n = 1;
  int x_size = 1;
  std::vector<int> y_size;
  std::vector<int> u_size;
  Vec x0_dist;
  /// trans[t-1][x][a] is the distribution of X_t given X_{t-1} = x, U_t = a.
  std::vector<std::vector<std::vector<Vec>>> trans;
  /// obs[k][t-1][x] is the distribution of Y^k_t given X_{t-1} = x.
  std::vector<std::vector<std::vector<Vec>>> obs;
  /// cost[t-1][x][a] is c_t(x, a).
  std::vector<std::vector<Vec>> cost;

  int joint_actions() const;

  bool operator==(const ProblemSpec&) const = default;
};

/// Joint action U^{1:K}_t as a tuple together with its flattened index.
struct JointAction {
  std::vector<int> u;
  int index = 0;
};

int joint_action_index(const ProblemSpec& spec, std::span<const int> u);
JointAction joint_action(const ProblemSpec& spec, int index);

/// Parse problem-file JSON. Mirrors the file exactly; no validation of
/// probability rows happens here.
ProblemSpec load_problem(std::string_view text);

/// Serialize to the problem-file JSON format. load_problem inverts it exactly.
std::string serialize_problem(const ProblemSpec& spec);

struct Violation {
  std::string path;
  double observed = 0.0;
  std::string message;
};

/// One entry per broken invariant; empty iff the instance is valid.
std::vector<Violation> validate_problem(const ProblemSpec& spec);

/// Rescale every probability row so it sums to one. Call after validation.
ProblemSpec normalized(ProblemSpec spec);

/// load_problem + validate_problem (throws SchemaError listing violations)
/// + normalized.
ProblemSpec prepare_problem(std::string_view text);
ProblemSpec read_problem_file(const std::string& path);

/// Index ranges of the private information window at time t.
///
/// Lambda^k_t holds Y^k over [obs_lo, obs_hi] and U^k over [act_lo, act_hi];
/// ranges are clipped at stage 1. shared_horizon counts the (Y, U) stages
/// already inside the common information.
struct Window {
  int obs_lo = 1;
  int obs_hi = 0;
  int act_lo = 1;
  int act_hi = 0;
  int shared_horizon = 0;

  int obs_count() const { return obs_hi >= obs_lo ? obs_hi - obs_lo + 1 : 0; }
  int act_count() const { return act_hi >= act_lo ? act_hi - act_lo + 1 : 0; }
};

Window window(int t, const ProblemSpec& spec);

}  // namespace delayshare
