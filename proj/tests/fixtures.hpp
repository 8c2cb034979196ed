#pragma once

#include <string>

#include "delayshare/instances.hpp"
#include "delayshare/model.hpp"

namespace fixtures {

using delayshare::ProblemSpec;
using delayshare::Vec;

// One state, one action per controller, fixed costs.
inline ProblemSpec single_state(int K, int T, int n, double c) {
  ProblemSpec s;
  s.K = K, s.T = T, s.n = n, s.x_size = 1;
  s.y_size.assign(K, 1);
  s.u_size.assign(K, 1);
  s.x0_dist = {1.0};
  s.trans.assign(T, {{Vec{1.0}}});
  s.obs.assign(K, std::vector<std::vector<Vec>>(T, {Vec{1.0}}));
  s.cost.assign(T, {Vec{c}});
  return s;
}

inline ProblemSpec with_cost(ProblemSpec s, double c) {
  for (auto& per_t : s.cost)
    for (auto& row : per_t)
      for (double& v : row) v = c;
  return s;
}

// The n = 2, T = 2 instance used against the Python brute force.
inline ProblemSpec small_n2() {
  return delayshare::random_instance({2, 2, 2, 2, {2, 1}, {2, 1}}, 5);
}

}  // namespace fixtures
