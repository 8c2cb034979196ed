#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "delayshare/coordinator.hpp"
#include "delayshare/histories.hpp"
#include "delayshare/layout.hpp"

namespace delayshare {

constexpr double kExactTol = 1e-12;

/// n = 1: Pi_t(x, y) = prod_k P(y^k | x) * P(X_{t-1} = x | delta_t) at every
/// reachable history, and the last factor is the same under two designs.
struct FactorizationReport {
  bool passed = false;
  std::size_t histories = 0;
  std::size_t shared_histories = 0;
  double max_factor_error = 0.0;
  double max_design_gap = 0.0;
};

FactorizationReport check_one_step_factorization(const Layout& layout,
                                                 const Design& design,
                                                 const Design& other);

/// Product-state instances where each controller observes its own
/// subsystem exactly: Theta_t is a point mass once t > n.
struct AicardiReport {
  bool passed = false;
  std::size_t nodes_checked = 0;
  double min_peak = 1.0;        // smallest max-entry of Theta over t > n
  bool indexed_by_state = true;  // (argmax Theta, r) identifies the node
  double dp1_cost = 0.0;
  double dp2_cost = 0.0;
};

/// Throws PreconditionError naming the violated assumption.
void require_product_state(const ProblemSpec& spec);

AicardiReport check_aicardi_degenerate(const Layout& layout,
                                       const GraphBudget& budget = {});

/// Phi_t = P(X_{t-2}, U^{1:2}_{t-1} | delta_t), flattened as x * A + a.
struct KurtaranWitness {
  int t = 0;
  CommonHistory delta;
  CommonHistory delta_prime;
  Vec phi;
  Vec phi_other;
  std::size_t z = 0;
  Vec phi_prime_1;
  Vec phi_prime_2;
  double gap = 0.0;
  bool verified = false;
};

struct KurtaranReport {
  std::optional<KurtaranWitness> witness;
  std::size_t histories = 0;
  std::size_t groups = 0;
  std::size_t comparisons = 0;
};

KurtaranReport kurtaran_witness_search(const ProblemSpec& spec,
                                       const Design& design,
                                       std::size_t max_paths = 10'000'000);

/// Phi_t at one common history, recomputed by filtering trajectories.
Vec kurtaran_phi(const ProblemSpec& spec, const Design& design, int t,
                 const CommonHistory& delta,
                 std::size_t max_paths = 10'000'000);

struct ConcavityReport {
  bool passed = false;
  std::size_t samples = 0;
  Vec min_slack;  // [t-1]
  double worst = 0.0;
};

/// Random beliefs on S_t with a random zero pattern and Exp(1) weights.
Vec random_belief(std::size_t size, std::mt19937_64& rng);

ConcavityReport concavity_probe(const Layout& layout, std::size_t samples,
                                std::uint64_t seed);

/// Largest |min alpha.pi - J_t(pi)| over random beliefs at every t.
double alpha_envelope_gap(const Layout& layout, const AlphaSet& alpha,
                          std::size_t samples, std::uint64_t seed);

/// Cost vector of the policy tree that is optimal at pi: alpha[s] is the
/// expected cost-to-go from state s. Linear in the belief and >= J_t, with
/// equality at pi. Successors of z values pi cannot reveal continue from a
/// uniform belief over the states that reveal them.
Vec policy_alpha(const Layout& layout, ValueOracle& oracle, const PiBelief& pi);

/// Same measure as alpha_envelope_gap, with the set at each t made of the
/// policy_alpha vectors of the sampled beliefs. Scales where the full
/// backup does not.
double policy_alpha_envelope_gap(const Layout& layout, std::size_t samples,
                                 std::uint64_t seed);

}  // namespace delayshare
