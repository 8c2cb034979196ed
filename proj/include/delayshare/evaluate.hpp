#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "delayshare/histories.hpp"
#include "delayshare/layout.hpp"
#include "delayshare/model.hpp"

namespace delayshare {

struct EvalResult {
  double expected_cost = 0.0;
  Vec per_stage;  // [t-1]
};

struct SimResult {
  std::size_t episodes = 0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
};

/// One primitive trajectory prefix up to (but excluding) the actions at t.
struct PathPoint {
  double p = 0.0;
  std::vector<int> x;               // X_0 .. X_{t-1}
  std::vector<std::vector<int>> y;  // [k] Y_1 .. Y_t
  std::vector<std::vector<int>> u;  // [k] U_1 .. U_{t-1}
  CommonHistory delta;              // z_{n+1} .. z_t
};

/// Visit every positive-probability prefix at time t under the design.
/// Throws BudgetExceeded when more than max_paths prefixes are generated.
void for_each_path(const ProblemSpec& spec, const Design& design, int t,
                   const std::function<void(const PathPoint&)>& fn,
                   std::size_t max_paths = 10'000'000);

/// Exact expected cost by summation over all primitive trajectories.
EvalResult exact_cost(const ProblemSpec& spec, const Design& design,
                      std::size_t max_paths = 10'000'000);

/// Monte Carlo estimate. Episode i draws from mt19937_64 seeded with
/// seed_seq{seed, i} (each split into 32-bit halves).
SimResult simulate(const ProblemSpec& spec, const Design& design,
                   std::size_t episodes, std::uint64_t seed);

/// Conditional quantities given the common history, by path summation.
struct HistoryConditional {
  double prob = 0.0;   // P(delta_t)
  Vec joint_state;     // P(S_t | delta_t), StateSpace ranks
  Vec x_shared;        // P(X_{max(0,t-n)} | delta_t)
  Vec x_prev;          // P(X_{t-1} | delta_t)
  double stage_cost = 0.0;  // E[c_t(X_t, U_t) | delta_t]
};

std::map<CommonHistory, HistoryConditional> history_conditionals(
    const Layout& layout, const Design& design, int t,
    std::size_t max_paths = 10'000'000);

/// Number of designs, prod over k, t of |U^k|^(|L^k_t| |D_t|).
double design_count(const ProblemSpec& spec);

/// Number of primitive trajectories exact_cost visits in the worst case.
double trajectory_count(const ProblemSpec& spec);

/// Visit every design once as extensional laws[k][t-1][delta][lambda].
/// Order: controller 1 first, then time, then common history, then
/// private rank; the last entry varies fastest. Return false to stop.
/// Throws BudgetExceeded before enumerating if design_count > max_designs.
void for_each_design(
    const ProblemSpec& spec, double max_designs,
    const std::function<bool(const ExtensionalDesign&)>& fn);

struct BruteForceResult {
  double cost = 0.0;
  std::unique_ptr<ExtensionalDesign> design;
  double designs = 0;
};

/// Minimum of exact_cost over every design; ties keep the earliest design.
/// max_work bounds the product designs x trajectories.
BruteForceResult brute_force_optimum(const ProblemSpec& spec,
                                     double max_designs = 1e7,
                                     double max_work = 1e7);

}  // namespace delayshare
