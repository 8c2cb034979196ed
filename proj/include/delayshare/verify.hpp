#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "delayshare/coordinator.hpp"
#include "delayshare/histories.hpp"
#include "delayshare/layout.hpp"

namespace delayshare {

/// Largest deviations between the recursive information states and direct
/// conditioning on the common history, over every reachable history of the
/// given designs.
struct RecursionCheck {
  std::size_t histories = 0;
  double pi_error = 0.0;      // belief_update recursion vs P(S_t | delta_t)
  double theta_error = 0.0;   // theta_update recursion vs P(X_{t-n} | delta_t)
  double h_error = 0.0;       // h_map(theta, r) vs recursive Pi
  double cost_error = 0.0;    // expected_stage_cost vs E[c_t | delta_t]
  double pz_error = 0.0;      // |sum_z P(z | pi, gamma) - 1|
  double design_gap = 0.0;    // P(X_{t-n} | delta_t) across designs
  std::size_t shared = 0;     // histories reached by more than one design
};

RecursionCheck check_recursions(const Layout& layout,
                                const std::vector<const Design*>& designs,
                                std::size_t max_paths = 10'000'000);

/// Largest |sum of class masses - 1| over the nodes of either graph, i.e.
/// the deviation of sum_z P(z | node, gamma) from one.
double graph_mass_error(const std::vector<std::vector<Vec>>& class_mass);

struct VerifyOptions {
  std::uint64_t seed = 7;
  std::size_t samples = 100;       // concavity samples per t
  std::size_t episodes = 100'000;  // Monte Carlo episodes
  std::size_t random_designs = 10;
  double max_designs = 1e5;        // brute force only below this
  std::size_t max_paths = 10'000'000;
  GraphBudget graph;
};

struct VerifyCheck {
  std::string name;
  enum class Status { kPass, kFail, kSkip } status = Status::kPass;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;

  bool passed() const;
  /// One line per check; no timings, so reruns are byte-identical.
  std::string text() const;
};

VerifyReport verify_instance(const ProblemSpec& spec,
                             const VerifyOptions& options = {});

/// printf("%.12g").
std::string fmt12(double v);

}  // namespace delayshare
