#include "delayshare/histories.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "delayshare/errors.hpp"

namespace delayshare {

namespace {

constexpr std::uint64_t kRankLimit = std::uint64_t(1) << 63;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Multiplies with an overflow guard on the 2^63 rank ceiling.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > kRankLimit / a) {
    throw BudgetExceeded(what, double(a) * double(b), double(kRankLimit));
  }
  return a * b;
}

void check_time(int t, int lo, int hi) {
  if (t < lo || t > hi) {
    throw DomainError("time " + std::to_string(t) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::size_t z_card(const ProblemSpec& spec) {
  std::size_t c = 1;
  for (int k = 0; k < spec.K; ++k) {
    c *= std::size_t(spec.y_size[k]) * std::size_t(spec.u_size[k]);
  }
  return c;
}

}  // namespace

std::size_t WindowSpace::size() const {
  return ipow(y_card, ny) * ipow(u_card, nu);
}

std::size_t WindowSpace::encode(std::span<const int> ys,
                                std::span<const int> us) const {
  if (int(ys.size()) != ny || int(us.size()) != nu) {
    throw DomainError("window arity mismatch");
  }
  std::size_t r = 0;
  for (int y : ys) {
    if (y < 0 || y >= y_card) throw DomainError("observation out of range");
    r = r * y_card + y;
  }
  for (int u : us) {
    if (u < 0 || u >= u_card) throw DomainError("action out of range");
    r = r * u_card + u;
  }
  return r;
}

void WindowSpace::decode(std::size_t rank, std::vector<int>& ys,
                         std::vector<int>& us) const {
  if (rank >= size()) throw DomainError("window rank out of range");
  ys.assign(ny, 0);
  us.assign(nu, 0);
  for (int i = nu - 1; i >= 0; --i) {
    us[i] = int(rank % u_card);
    rank /= u_card;
  }
  for (int i = ny - 1; i >= 0; --i) {
    ys[i] = int(rank % y_card);
    rank /= y_card;
  }
}

WindowSpace private_layout(const ProblemSpec& spec, int k, int t) {
  Window w = window(t, spec);
  if (k < 0 || k >= spec.K) throw DomainError("controller out of range");
  return WindowSpace{spec.y_size[k], spec.u_size[k], w.obs_count(),
                     w.act_count()};
}

std::vector<PrivateInfo> private_space(const ProblemSpec& spec, int k, int t) {
  WindowSpace layout = private_layout(spec, k, t);
  std::vector<PrivateInfo> out(layout.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r].k = k;
    out[r].t = t;
    out[r].rank = r;
    layout.decode(r, out[r].y_seq, out[r].u_seq);
  }
  return out;
}

std::size_t common_obs_count(const ProblemSpec& spec, int t) {
  check_time(t, 2, spec.T + 1);
  return t <= spec.n ? 1 : z_card(spec);
}

std::size_t common_obs_rank(const ProblemSpec& spec, std::span<const int> ys,
                            std::span<const int> us) {
  std::size_t r = 0;
  for (int k = 0; k < spec.K; ++k) r = r * spec.y_size[k] + ys[k];
  for (int k = 0; k < spec.K; ++k) r = r * spec.u_size[k] + us[k];
  return r;
}

CommonObs common_obs(const ProblemSpec& spec, int t, std::size_t rank) {
  std::size_t count = common_obs_count(spec, t);
  if (rank >= count) throw DomainError("common observation rank out of range");
  CommonObs z;
  z.t = t;
  z.rank = rank;
  z.null = t <= spec.n;
  if (z.null) return z;
  z.y.assign(spec.K, 0);
  z.u.assign(spec.K, 0);
  for (int k = spec.K - 1; k >= 0; --k) {
    z.u[k] = int(rank % spec.u_size[k]);
    rank /= spec.u_size[k];
  }
  for (int k = spec.K - 1; k >= 0; --k) {
    z.y[k] = int(rank % spec.y_size[k]);
    rank /= spec.y_size[k];
  }
  return z;
}

std::vector<CommonObs> common_obs_space(const ProblemSpec& spec, int t) {
  check_time(t, 2, spec.T);
  std::vector<CommonObs> out;
  std::size_t count = common_obs_count(spec, t);
  for (std::size_t r = 0; r < count; ++r) out.push_back(common_obs(spec, t, r));
  return out;
}

double common_history_count(const ProblemSpec& spec, int t) {
  return std::pow(double(z_card(spec)), window(t, spec).shared_horizon);
}

std::size_t common_history_rank(const ProblemSpec& spec, int t,
                                std::span<const int> delta) {
  Window w = window(t, spec);
  if (int(delta.size()) != w.shared_horizon) {
    throw DomainError("common history length mismatch at t=" +
                      std::to_string(t));
  }
  std::size_t zc = z_card(spec);
  std::size_t r = 0;
  for (int z : delta) {
    if (z < 0 || std::size_t(z) >= zc) throw DomainError("z rank out of range");
    r = r * zc + std::size_t(z);
  }
  return r;
}

CommonHistory common_history(const ProblemSpec& spec, int t,
                             std::size_t rank) {
  Window w = window(t, spec);
  std::size_t zc = z_card(spec);
  CommonHistory delta(w.shared_horizon);
  for (int i = w.shared_horizon - 1; i >= 0; --i) {
    delta[i] = int(rank % zc);
    rank /= zc;
  }
  if (rank != 0) throw DomainError("common history rank out of range");
  return delta;
}

std::uint64_t profile_count(const ProblemSpec& spec, int t) {
  std::uint64_t count = 1;
  for (int k = 0; k < spec.K; ++k) {
    std::size_t L = private_layout(spec, k, t).size();
    for (std::size_t i = 0; i < L; ++i) {
      count = checked_mul(count, spec.u_size[k], "profile count");
    }
  }
  return count;
}

std::uint64_t profile_rank(const ProblemSpec& spec, const GammaProfile& g) {
  profile_count(spec, g.t);
  std::uint64_t r = 0;
  for (int k = 0; k < spec.K; ++k) {
    std::size_t L = private_layout(spec, k, g.t).size();
    if (g.tables[k].size() != L) throw DomainError("profile table size");
    for (int a : g.tables[k]) {
      if (a < 0 || a >= spec.u_size[k]) throw DomainError("profile action");
      r = r * spec.u_size[k] + std::uint64_t(a);
    }
  }
  return r;
}

GammaProfile profile_at(const ProblemSpec& spec, int t, std::uint64_t rank) {
  if (rank >= profile_count(spec, t)) {
    throw DomainError("profile rank out of range");
  }
  GammaProfile g;
  g.t = t;
  g.tables.resize(spec.K);
  for (int k = spec.K - 1; k >= 0; --k) {
    std::size_t L = private_layout(spec, k, t).size();
    g.tables[k].assign(L, 0);
    for (std::size_t i = L; i-- > 0;) {
      g.tables[k][i] = int(rank % spec.u_size[k]);
      rank /= spec.u_size[k];
    }
  }
  return g;
}

void for_each_profile(const ProblemSpec& spec, int t,
                      const std::function<bool(const GammaProfile&)>& fn) {
  profile_count(spec, t);
  GammaProfile g;
  g.t = t;
  g.tables.resize(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    g.tables[k].assign(private_layout(spec, k, t).size(), 0);
  }
  while (true) {
    if (!fn(g)) return;
    // Odometer: last table entry of the last controller turns fastest.
    int k = spec.K - 1;
    for (; k >= 0; --k) {
      auto& tab = g.tables[k];
      std::size_t i = tab.size();
      for (; i-- > 0;) {
        if (++tab[i] < spec.u_size[k]) break;
        tab[i] = 0;
      }
      if (i != std::size_t(-1)) break;
    }
    if (k < 0) return;
  }
}

JointAction apply_profile(const ProblemSpec& spec, const GammaProfile& g,
                          std::span<const std::size_t> lambda) {
  if (int(lambda.size()) != spec.K) throw DomainError("lambda arity");
  std::vector<int> u(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    if (lambda[k] >= g.tables[k].size()) {
      throw DomainError("private information rank out of range");
    }
    u[k] = g.tables[k][lambda[k]];
  }
  return JointAction{u, joint_action_index(spec, u)};
}

int RevealSplit::action(std::size_t restriction, int entry) const {
  std::size_t div = ipow(u_card, entries - 1 - entry);
  return int((restriction / div) % u_card);
}

std::size_t RevealSplit::restriction_of(std::span<const int> table,
                                        int cls) const {
  std::size_t r = 0;
  for (std::size_t lam : members[cls]) r = r * u_card + table[lam];
  return r;
}

RevealSplit reveal_split(const ProblemSpec& spec, int k, int t) {
  WindowSpace layout = private_layout(spec, k, t);
  const std::size_t L = layout.size();
  RevealSplit s;
  s.u_card = spec.u_size[k];
  s.class_of.assign(L, 0);
  s.entry_of.assign(L, 0);
  if (t < spec.n) {
    s.kind = RevealSplit::Kind::kNothing;
    s.classes = 1;
    s.entries = int(L);
    s.members.assign(1, {});
    for (std::size_t lam = 0; lam < L; ++lam) {
      s.entry_of[lam] = int(lam);
      s.members[0].push_back(lam);
    }
  } else if (spec.n == 1) {
    s.kind = RevealSplit::Kind::kAction;
    s.classes = int(L);
    s.entries = 1;
    s.members.assign(L, {});
    s.class_y.assign(L, 0);
    std::vector<int> ys, us;
    for (std::size_t lam = 0; lam < L; ++lam) {
      layout.decode(lam, ys, us);
      s.class_of[lam] = int(lam);
      s.members[lam].push_back(lam);
      s.class_y[lam] = ys[0];
    }
  } else {
    s.kind = RevealSplit::Kind::kPrefix;
    const int U = spec.u_size[k];
    s.classes = spec.y_size[k] * U;
    WindowSpace rest{layout.y_card, layout.u_card, layout.ny - 1,
                     layout.nu - 1};
    s.entries = int(rest.size());
    s.members.assign(s.classes, std::vector<std::size_t>(s.entries));
    s.class_y.assign(s.classes, 0);
    s.class_u.assign(s.classes, 0);
    std::vector<int> ys, us;
    for (std::size_t lam = 0; lam < L; ++lam) {
      layout.decode(lam, ys, us);
      int cls = ys[0] * U + us[0];
      std::size_t e = rest.encode(std::span(ys).subspan(1),
                                  std::span(us).subspan(1));
      s.class_of[lam] = cls;
      s.entry_of[lam] = int(e);
      s.members[cls][e] = lam;
      s.class_y[cls] = ys[0];
      s.class_u[cls] = us[0];
    }
  }
  double r = std::pow(double(s.u_card), s.entries);
  if (r > 1e12) {
    throw BudgetExceeded("prescription restrictions per class", r, 1e12);
  }
  s.restrictions = ipow(s.u_card, s.entries);
  return s;
}

ExtensionalDesign::ExtensionalDesign(
    const ProblemSpec& spec,
    std::vector<std::vector<std::vector<std::vector<int>>>> laws)
    : n_(spec.n), z_card_(z_card(spec)), laws_(std::move(laws)) {
  if (int(laws_.size()) != spec.K) throw SchemaError("design: controller count");
  for (int k = 0; k < spec.K; ++k) {
    if (int(laws_[k].size()) != spec.T) throw SchemaError("design: horizon");
    for (int t = 1; t <= spec.T; ++t) {
      const auto& per_delta = laws_[k][t - 1];
      if (double(per_delta.size()) != common_history_count(spec, t)) {
        throw SchemaError("design: common history count at t=" +
                          std::to_string(t));
      }
      std::size_t L = private_layout(spec, k, t).size();
      for (const auto& tab : per_delta) {
        if (tab.size() != L) throw SchemaError("design: private space size");
        for (int a : tab) {
          if (a < 0 || a >= spec.u_size[k]) {
            throw SchemaError("design: action out of range");
          }
        }
      }
    }
  }
}

GammaProfile ExtensionalDesign::prescription(int t,
                                             std::span<const int> delta) const {
  std::size_t r = 0;
  for (int z : delta) r = r * z_card_ + std::size_t(z);
  GammaProfile g;
  g.t = t;
  for (const auto& per_k : laws_) {
    const auto& per_delta = per_k.at(t - 1);
    if (r >= per_delta.size()) throw DomainError("common history rank");
    g.tables.push_back(per_delta[r]);
  }
  return g;
}

PolicyDesign::PolicyDesign(const ProblemSpec& spec, CoordinatorPolicy policy,
                           std::vector<std::vector<std::vector<int>>> children)
    : n_(spec.n),
      T_(spec.T),
      policy_(std::move(policy)),
      children_(std::move(children)) {}

int PolicyDesign::node_at(int t, std::span<const int> delta) const {
  if (t < 1 || t > T_) throw DomainError("time out of range");
  if (int(delta.size()) != std::max(0, t - n_)) {
    throw DomainError("common history length mismatch");
  }
  int node = 0;
  for (int tau = 1; tau < t; ++tau) {
    int z = tau + 1 > n_ ? delta[tau - n_] : 0;
    const auto& row = children_[tau - 1][node];
    if (z < 0 || std::size_t(z) >= row.size() || row[z] < 0) {
      throw OffDesignHistory("common observation at t=" +
                             std::to_string(tau + 1) +
                             " cannot occur under the policy");
    }
    node = row[z];
  }
  return node;
}

GammaProfile PolicyDesign::prescription(int t,
                                        std::span<const int> delta) const {
  return policy_.profiles[t - 1][node_at(t, delta)];
}

HashedDesign::HashedDesign(const ProblemSpec& spec, std::uint64_t seed)
    : n_(spec.n), u_size_(spec.u_size), seed_(seed) {
  private_sizes_.resize(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    for (int t = 1; t <= spec.T; ++t) {
      private_sizes_[k].push_back(private_layout(spec, k, t).size());
    }
  }
}

GammaProfile HashedDesign::prescription(int t,
                                        std::span<const int> delta) const {
  std::uint64_t h = splitmix64(seed_ ^ splitmix64(std::uint64_t(t)));
  for (int z : delta) h = splitmix64(h ^ std::uint64_t(z + 1));
  GammaProfile g;
  g.t = t;
  g.tables.resize(u_size_.size());
  for (std::size_t k = 0; k < u_size_.size(); ++k) {
    std::uint64_t hk = splitmix64(h ^ (0x51ed27ULL * (k + 1)));
    std::size_t L = private_sizes_[k][t - 1];
    g.tables[k].resize(L);
    for (std::size_t lam = 0; lam < L; ++lam) {
      g.tables[k][lam] = int(splitmix64(hk + lam) % std::uint64_t(u_size_[k]));
    }
  }
  return g;
}

}  // namespace delayshare
