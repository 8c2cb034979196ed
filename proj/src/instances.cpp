#include "delayshare/instances.hpp"

#include <random>

#include "delayshare/errors.hpp"
#include "delayshare/random.hpp"

namespace delayshare {

namespace {

int draw_int(std::mt19937_64& rng, int bound) {
  return uniform_index(rng, bound);
}

Vec random_row(std::mt19937_64& rng, int size, int zero_percent = 0) {
  Vec row(size, 0.0);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    if (size > 1 && draw_int(rng, 100) < zero_percent) continue;
    row[i] = 1 + draw_int(rng, 16);
    sum += row[i];
  }
  if (sum == 0.0) {
    row[draw_int(rng, size)] = 1.0;
    sum = 1.0;
  }
  for (double& p : row) p /= sum;
  return row;
}

double random_cost(std::mt19937_64& rng) { return draw_int(rng, 1000) / 100.0; }

void random_costs(ProblemSpec& spec, std::mt19937_64& rng) {
  const int A = spec.joint_actions();
  spec.cost.assign(spec.T, std::vector<Vec>(spec.x_size, Vec(A, 0.0)));
  for (auto& per_t : spec.cost) {
    for (auto& per_x : per_t) {
      for (double& c : per_x) c = random_cost(rng);
    }
  }
}

void check_shape(const InstanceShape& s) {
  if (s.K < 1 || s.T < 1 || s.n < 1 || s.x_size < 1 ||
      int(s.y_size.size()) != s.K || int(s.u_size.size()) != s.K) {
    throw InputError("invalid instance shape");
  }
}

}  // namespace

ProblemSpec random_instance(const InstanceShape& shape, std::uint64_t seed) {
  check_shape(shape);
  std::mt19937_64 rng(seed);
  ProblemSpec spec;
  spec.K = shape.K;
  spec.T = shape.T;
  spec.n = shape.n;
  spec.x_size = shape.x_size;
  spec.y_size = shape.y_size;
  spec.u_size = shape.u_size;
  const int A = spec.joint_actions();
  spec.x0_dist = random_row(rng, spec.x_size, shape.zero_percent);
  spec.trans.resize(spec.T);
  for (auto& per_t : spec.trans) {
    per_t.resize(spec.x_size);
    for (auto& per_x : per_t) {
      for (int a = 0; a < A; ++a) per_x.push_back(random_row(rng, spec.x_size, shape.zero_percent));
    }
  }
  spec.obs.resize(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    spec.obs[k].resize(spec.T);
    for (auto& per_t : spec.obs[k]) {
      for (int x = 0; x < spec.x_size; ++x) {
        per_t.push_back(random_row(rng, spec.y_size[k], shape.zero_percent));
      }
    }
  }
  random_costs(spec, rng);
  return spec;
}

ProblemSpec product_state_instance(int K, int T, int n, std::uint64_t seed) {
  if (K < 1 || K > 16 || T < 1 || n < 1) {
    throw InputError("invalid product-state shape");
  }
  std::mt19937_64 rng(seed);
  ProblemSpec spec;
  spec.K = K;
  spec.T = T;
  spec.n = n;
  spec.x_size = 1 << K;
  spec.y_size.assign(K, 2);
  spec.u_size.assign(K, 2);
  const int A = spec.joint_actions();
  spec.x0_dist = random_row(rng, spec.x_size);

  spec.trans.assign(T, std::vector<std::vector<Vec>>(
                           spec.x_size, std::vector<Vec>(A, Vec(spec.x_size))));
  for (auto& per_t : spec.trans) {
    for (auto& per_x : per_t) {
      for (auto& row : per_x) row[draw_int(rng, spec.x_size)] = 1.0;
    }
  }
  spec.obs.resize(K);
  for (int k = 0; k < K; ++k) {
    const int shift = K - 1 - k;
    spec.obs[k].assign(T, std::vector<Vec>(spec.x_size, Vec(2, 0.0)));
    for (auto& per_t : spec.obs[k]) {
      for (int x = 0; x < spec.x_size; ++x) per_t[x][(x >> shift) & 1] = 1.0;
    }
  }
  random_costs(spec, rng);
  return spec;
}

std::vector<std::string> canonical_instance_names() {
  return {"IO", "I1", "I2", "IA"};
}

ProblemSpec canonical_instance(const std::string& name) {
  if (name == "IO") {
    return random_instance({2, 2, 1, 2, {2, 1}, {2, 1}}, 20240101);
  }
  if (name == "I1") {
    return random_instance({2, 2, 1, 2, {2, 2}, {2, 2}}, 20240115);
  }
  if (name == "I2") {
    return random_instance({2, 3, 2, 2, {2, 2}, {2, 2}}, 20240103);
  }
  if (name == "IA") return product_state_instance(2, 3, 2, 20240104);
  throw InputError("unknown canonical instance " + name);
}

}  // namespace delayshare
