#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "delayshare/model.hpp"

namespace delayshare {

struct InstanceShape {
  int K = 2;
  int T = 2;
  int n = 1;
  int x_size = 2;
  std::vector<int> y_size{2, 2};
  std::vector<int> u_size{2, 2};
  /// Chance (in percent) that a probability entry is forced to zero.
  int zero_percent = 0;
};

/// Random kernels and costs. Probability rows are ratios of small integers
/// with optional zeros; costs are multiples of 0.01 in [0, 10).
ProblemSpec random_instance(const InstanceShape& shape, std::uint64_t seed);

/// Product-state instance with K binary subsystems. Controller k observes
/// its own coordinate of X_{t-1} exactly; transitions are deterministic
/// (a seeded random map of (X_{t-1}, U_t)). Subsystem 1 is the most significant bit of
/// the state index.
ProblemSpec product_state_instance(int K, int T, int n, std::uint64_t seed);

/// The shipped test instances: "IO", "I1", "I2", "IA".
ProblemSpec canonical_instance(const std::string& name);
std::vector<std::string> canonical_instance_names();

}  // namespace delayshare
