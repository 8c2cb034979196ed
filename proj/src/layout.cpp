#include "delayshare/layout.hpp"

#include <algorithm>
#include <limits>

#include "delayshare/errors.hpp"

namespace delayshare {

namespace {

constexpr double kTieEps = 1e-12;
constexpr double kMaxTuples = 5e7;

}  // namespace

StateSpace::StateSpace(const ProblemSpec& spec, int t) : t_(t), K_(spec.K) {
  double total = spec.x_size;
  for (int k = 0; k < spec.K; ++k) {
    private_sizes_.push_back(private_layout(spec, k, t).size());
    total *= double(private_sizes_.back());
  }
  if (total > kMaxTuples) {
    throw BudgetExceeded("joint state space at t=" + std::to_string(t), total,
                         kMaxTuples);
  }
  std::size_t size = std::size_t(total);
  x_of_.resize(size);
  lam_.resize(size * K_);
  for (std::size_t s = 0; s < size; ++s) {
    std::size_t r = s;
    for (int k = K_ - 1; k >= 0; --k) {
      lam_[s * K_ + k] = r % private_sizes_[k];
      r /= private_sizes_[k];
    }
    x_of_[s] = int(r);
  }
}

std::size_t StateSpace::rank(int x_prev,
                             std::span<const std::size_t> lambdas) const {
  std::size_t r = std::size_t(x_prev);
  for (int k = 0; k < K_; ++k) r = r * private_sizes_[k] + lambdas[k];
  return r;
}

Branching::Branching(const ProblemSpec& spec, const StateSpace& states, int t)
    : spec_(&spec), states_(&states), t_(t) {
  const int K = spec.K;
  double ct = 1, rt = 1;
  for (int k = 0; k < K; ++k) {
    splits_.push_back(reveal_split(spec, k, t));
    private_sizes_.push_back(states.private_size(k));
    ct *= splits_.back().classes;
    rt *= double(splits_.back().restrictions);
  }
  if (ct * rt > kMaxTuples) {
    throw BudgetExceeded("branching table at t=" + std::to_string(t), ct * rt,
                         kMaxTuples);
  }
  class_stride_.assign(K, 1);
  restriction_stride_.assign(K, 1);
  for (int k = K - 2; k >= 0; --k) {
    class_stride_[k] = class_stride_[k + 1] * splits_[k + 1].classes;
    restriction_stride_[k] =
        restriction_stride_[k + 1] * splits_[k + 1].restrictions;
  }
  class_tuples_ = class_stride_[0] * splits_[0].classes;
  restriction_tuples_ = restriction_stride_[0] * splits_[0].restrictions;

  state_class_.resize(states.size());
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::size_t c = 0;
    for (int k = 0; k < K; ++k) {
      c += std::size_t(splits_[k].class_of[states.lambda(s, k)]) *
           class_stride_[k];
    }
    state_class_[s] = c;
  }

  const int A = spec.joint_actions();
  stage_cost_.assign(std::size_t(spec.x_size) * A, 0.0);
  for (int x = 0; x < spec.x_size; ++x) {
    for (int a = 0; a < A; ++a) {
      const auto& row = spec.trans[t - 1][x][a];
      double c = 0.0;
      for (int x2 = 0; x2 < spec.x_size; ++x2) {
        c += row[x2] * spec.cost[t - 1][x2][a];
      }
      stage_cost_[std::size_t(x) * A + a] = c;
    }
  }
}

int Branching::class_of(std::size_t class_tuple, int k) const {
  return int((class_tuple / class_stride_[k]) % splits_[k].classes);
}

std::size_t Branching::restriction_of(std::size_t restriction_tuple,
                                      int k) const {
  return (restriction_tuple / restriction_stride_[k]) % splits_[k].restrictions;
}

std::size_t Branching::z_of(std::size_t c, std::size_t rho) const {
  if (t_ < spec_->n) return 0;
  const int K = spec_->K;
  std::vector<int> ys(K), us(K);
  for (int k = 0; k < K; ++k) {
    const auto& sp = splits_[k];
    int cls = class_of(c, k);
    ys[k] = sp.class_y[cls];
    us[k] = sp.kind == RevealSplit::Kind::kAction
                ? sp.action(restriction_of(rho, k), 0)
                : sp.class_u[cls];
  }
  return common_obs_rank(*spec_, ys, us);
}

GammaProfile Branching::fill(std::size_t c, std::size_t rho) const {
  GammaProfile g;
  g.t = t_;
  g.tables.resize(spec_->K);
  for (int k = 0; k < spec_->K; ++k) {
    const auto& sp = splits_[k];
    g.tables[k].assign(private_sizes_[k], 0);
    int cls = class_of(c, k);
    std::size_t r = restriction_of(rho, k);
    for (int e = 0; e < sp.entries; ++e) {
      g.tables[k][sp.members[cls][e]] = sp.action(r, e);
    }
  }
  return g;
}

std::size_t Branching::restriction_tuple_of(const GammaProfile& g,
                                            std::size_t c) const {
  std::size_t rho = 0;
  for (int k = 0; k < spec_->K; ++k) {
    rho += splits_[k].restriction_of(g.tables[k], class_of(c, k)) *
           restriction_stride_[k];
  }
  return rho;
}

Vec Branching::class_masses(std::span<const double> belief) const {
  Vec mass(class_tuples_, 0.0);
  for (std::size_t s = 0; s < belief.size(); ++s) {
    mass[state_class_[s]] += belief[s];
  }
  return mass;
}

Vec Branching::stage_objective(std::span<const double> belief) const {
  const int K = spec_->K;
  const int A = spec_->joint_actions();
  Vec f(class_tuples_ * restriction_tuples_, 0.0);
  std::vector<int> u(K);
  for (std::size_t s = 0; s < belief.size(); ++s) {
    const double b = belief[s];
    if (b == 0.0) continue;
    const std::size_t c = state_class_[s];
    const int x = states_->x_prev(s);
    const double* costs = stage_cost_.data() + std::size_t(x) * A;
    double* row = f.data() + c * restriction_tuples_;
    for (std::size_t rho = 0; rho < restriction_tuples_; ++rho) {
      int a = 0;
      for (int k = 0; k < K; ++k) {
        const auto& sp = splits_[k];
        a = a * spec_->u_size[k] +
            sp.action(restriction_of(rho, k),
                      sp.entry_of[states_->lambda(s, k)]);
      }
      row[rho] += b * costs[a];
    }
  }
  return f;
}

TeamChoice Branching::minimize(std::span<const double> f) const {
  const int K = spec_->K;
  const int last = K - 1;
  const auto& inner = splits_[last];

  // Outer controllers enumerate full tables in rank order; the last
  // controller picks its restriction independently on each of its classes.
  std::vector<std::vector<int>> tables(K);
  for (int k = 0; k < K; ++k) tables[k].assign(private_sizes_[k], 0);

  std::size_t outer_class_tuples = 1;
  for (int k = 0; k < last; ++k) outer_class_tuples *= splits_[k].classes;

  std::vector<std::size_t> part_c(outer_class_tuples), part_r(outer_class_tuples);
  std::vector<int> cls(K, 0);

  double best_total = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> best_tables;
  std::vector<std::size_t> chosen(inner.classes), best_chosen;

  while (true) {
    for (std::size_t oc = 0; oc < outer_class_tuples; ++oc) {
      std::size_t r = oc, c_off = 0, r_off = 0;
      for (int k = last - 1; k >= 0; --k) {
        int ck = int(r % splits_[k].classes);
        r /= splits_[k].classes;
        c_off += std::size_t(ck) * class_stride_[k];
        r_off += splits_[k].restriction_of(tables[k], ck) *
                 restriction_stride_[k];
      }
      part_c[oc] = c_off;
      part_r[oc] = r_off;
    }

    double total = 0.0;
    for (int ck = 0; ck < inner.classes; ++ck) {
      double best_v = std::numeric_limits<double>::infinity();
      std::size_t best_r = 0;
      for (std::size_t rk = 0; rk < inner.restrictions; ++rk) {
        double v = 0.0;
        for (std::size_t oc = 0; oc < outer_class_tuples; ++oc) {
          std::size_t ci = part_c[oc] + std::size_t(ck) * class_stride_[last];
          std::size_t ri = part_r[oc] + rk * restriction_stride_[last];
          v += f[ci * restriction_tuples_ + ri];
        }
        if (v < best_v - kTieEps) {
          best_v = v;
          best_r = rk;
        }
      }
      total += best_v;
      chosen[ck] = best_r;
    }
    if (total < best_total - kTieEps) {
      best_total = total;
      best_tables = tables;
      best_chosen = chosen;
    }

    // Advance the outer odometer (controller 1 most significant).
    int k = last - 1;
    for (; k >= 0; --k) {
      auto& tab = tables[k];
      std::size_t i = tab.size();
      bool carried = true;
      while (i-- > 0) {
        if (++tab[i] < spec_->u_size[k]) {
          carried = false;
          break;
        }
        tab[i] = 0;
      }
      if (!carried) break;
    }
    if (k < 0) break;
  }

  TeamChoice out;
  out.value = best_total;
  out.profile.t = t_;
  out.profile.tables = best_tables;
  auto& tab = out.profile.tables[last];
  for (int ck = 0; ck < inner.classes; ++ck) {
    for (int e = 0; e < inner.entries; ++e) {
      tab[inner.members[ck][e]] = inner.action(best_chosen[ck], e);
    }
  }
  out.rank = profile_rank(*spec_, out.profile);
  return out;
}

Layout::Layout(ProblemSpec spec) : spec_(std::move(spec)) {
  const int K = spec_.K, T = spec_.T;
  states_.reserve(T);
  for (int t = 1; t <= T; ++t) states_.emplace_back(spec_, t);
  branchings_.reserve(T);
  for (int t = 1; t <= T; ++t) {
    branchings_.emplace_back(spec_, states_[t - 1], t);
  }

  windows_.resize(K);
  for (int k = 0; k < K; ++k) {
    for (int t = 1; t <= T; ++t) {
      windows_[k].push_back(private_layout(spec_, k, t));
    }
  }

  const int A = spec_.joint_actions();
  stage_cost_.resize(T);
  for (int t = 1; t <= T; ++t) {
    auto& sc = stage_cost_[t - 1];
    sc.assign(std::size_t(spec_.x_size) * A, 0.0);
    for (int x = 0; x < spec_.x_size; ++x) {
      for (int a = 0; a < A; ++a) {
        double c = 0.0;
        for (int x2 = 0; x2 < spec_.x_size; ++x2) {
          c += spec_.trans[t - 1][x][a][x2] * spec_.cost[t - 1][x2][a];
        }
        sc[std::size_t(x) * A + a] = c;
      }
    }
  }

  next_lambda_.resize(K);
  oldest_y_.resize(K);
  oldest_u_.resize(K);
  std::vector<int> ys, us;
  for (int k = 0; k < K; ++k) {
    const int U = spec_.u_size[k], Y = spec_.y_size[k];
    for (int t = 1; t <= T; ++t) {
      const WindowSpace& w = windows_[k][t - 1];
      std::vector<int> oy(w.size()), ou(w.size(), -1);
      for (std::size_t lam = 0; lam < w.size(); ++lam) {
        w.decode(lam, ys, us);
        oy[lam] = ys.empty() ? -1 : ys[0];
        if (!us.empty()) ou[lam] = us[0];
      }
      oldest_y_[k].push_back(std::move(oy));
      oldest_u_[k].push_back(std::move(ou));

      std::vector<std::size_t> next;
      if (t < T) {
        const WindowSpace& w2 = windows_[k][t];
        next.resize(w.size() * U * Y);
        for (std::size_t lam = 0; lam < w.size(); ++lam) {
          w.decode(lam, ys, us);
          for (int u = 0; u < U; ++u) {
            for (int y = 0; y < Y; ++y) {
              std::vector<int> yf(ys), uf(us);
              yf.push_back(y);
              uf.push_back(u);
              std::span<const int> ynew(yf.data() + yf.size() - w2.ny,
                                        std::size_t(w2.ny));
              std::span<const int> unew(uf.data() + uf.size() - w2.nu,
                                        std::size_t(w2.nu));
              next[(lam * U + u) * Y + y] = w2.encode(ynew, unew);
            }
          }
        }
      }
      next_lambda_[k].push_back(std::move(next));
    }
  }
}

std::size_t Layout::revealed_z(int t, std::size_t s,
                               std::span<const int> u) const {
  if (t < spec_.n) return 0;
  const StateSpace& st = states(t);
  std::vector<int> ys(spec_.K), us(spec_.K);
  for (int k = 0; k < spec_.K; ++k) {
    std::size_t lam = st.lambda(s, k);
    ys[k] = oldest_y(k, t, lam);
    us[k] = spec_.n == 1 ? u[k] : oldest_u(k, t, lam);
  }
  return common_obs_rank(spec_, ys, us);
}

}  // namespace delayshare
