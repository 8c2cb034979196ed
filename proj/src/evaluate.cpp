#include "delayshare/evaluate.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "delayshare/errors.hpp"
#include "delayshare/random.hpp"

namespace delayshare {

namespace {

// Prescriptions are looked up once per (t, delta).
class PrescriptionCache {
 public:
  explicit PrescriptionCache(const Design& d) : design_(d) {}
  const GammaProfile& at(int t, const CommonHistory& delta) {
    auto key = std::make_pair(t, delta);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(std::move(key), design_.prescription(t, delta)).first;
    }
    return it->second;
  }

 private:
  const Design& design_;
  std::map<std::pair<int, CommonHistory>, GammaProfile> cache_;
};

std::size_t lambda_rank(const ProblemSpec& spec, int k, int t,
                        const std::vector<int>& ys, const std::vector<int>& us) {
  const int lo = std::max(1, t - spec.n + 1);
  std::span<const int> yw(ys.data() + (lo - 1), std::size_t(t - lo + 1));
  std::span<const int> uw(us.data() + (lo - 1), std::size_t(t - lo));
  return private_layout(spec, k, t).encode(yw, uw);
}

// Depth-first walk over primitive trajectories. At stage m the observations
// Y_m are drawn; if m == stop the prefix is reported, otherwise actions and
// X_m follow and the walk descends.
class Walker {
 public:
  Walker(const ProblemSpec& spec, const Design& design, std::size_t max_paths)
      : spec_(spec), cache_(design), max_paths_(max_paths) {
    pt_.y.resize(spec.K);
    pt_.u.resize(spec.K);
  }

  std::function<void(const PathPoint&)> on_prefix;
  std::function<void(int t, double p, double cost)> on_cost;

  void run(int stop) {
    stop_ = stop;
    for (int x = 0; x < spec_.x_size; ++x) {
      const double p = spec_.x0_dist[x];
      if (p == 0.0) continue;
      pt_.x.push_back(x);
      stage(1, p);
      pt_.x.pop_back();
    }
  }

 private:
  void count() {
    if (++paths_ > max_paths_) {
      throw BudgetExceeded("trajectories", double(paths_), double(max_paths_));
    }
  }

  void stage(int m, double w) {
    const int K = spec_.K;
    const int x = pt_.x.back();
    std::vector<int> y(K, 0);
    while (true) {
      double p = w;
      for (int k = 0; k < K && p != 0.0; ++k) p *= spec_.obs[k][m - 1][x][y[k]];
      if (p != 0.0) {
        for (int k = 0; k < K; ++k) pt_.y[k].push_back(y[k]);
        if (m == stop_) {
          count();
          pt_.p = p;
          on_prefix(pt_);
        } else {
          act(m, p);
        }
        for (int k = 0; k < K; ++k) pt_.y[k].pop_back();
      }
      int k = K - 1;
      for (; k >= 0; --k) {
        if (++y[k] < spec_.y_size[k]) break;
        y[k] = 0;
      }
      if (k < 0) break;
    }
  }

  void act(int m, double p) {
    const int K = spec_.K;
    const GammaProfile& g = cache_.at(m, pt_.delta);
    std::vector<int> u(K);
    int a = 0;
    for (int k = 0; k < K; ++k) {
      u[k] = g.tables[k][lambda_rank(spec_, k, m, pt_.y[k], pt_.u[k])];
      a = a * spec_.u_size[k] + u[k];
    }
    for (int k = 0; k < K; ++k) pt_.u[k].push_back(u[k]);
    const bool grows = m + 1 > spec_.n;
    if (grows) {
      const int tau = m - spec_.n + 1;
      std::vector<int> zy(K), zu(K);
      for (int k = 0; k < K; ++k) {
        zy[k] = pt_.y[k][tau - 1];
        zu[k] = pt_.u[k][tau - 1];
      }
      pt_.delta.push_back(int(common_obs_rank(spec_, zy, zu)));
    }
    const auto& row = spec_.trans[m - 1][pt_.x.back()][a];
    for (int x2 = 0; x2 < spec_.x_size; ++x2) {
      if (row[x2] == 0.0) continue;
      const double q = p * row[x2];
      if (on_cost) on_cost(m, q, spec_.cost[m - 1][x2][a]);
      if (m < spec_.T && m < stop_) {
        pt_.x.push_back(x2);
        stage(m + 1, q);
        pt_.x.pop_back();
      } else {
        count();
      }
    }
    if (grows) pt_.delta.pop_back();
    for (int k = 0; k < K; ++k) pt_.u[k].pop_back();
  }

  const ProblemSpec& spec_;
  PrescriptionCache cache_;
  std::size_t max_paths_;
  std::size_t paths_ = 0;
  int stop_ = 0;
  PathPoint pt_;
};

int sample(const Vec& row, double r) {
  double acc = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (row[i] <= 0.0) continue;
    acc += row[i];
    last = int(i);
    if (r < acc) return last;
  }
  return last;
}

}  // namespace

void for_each_path(const ProblemSpec& spec, const Design& design, int t,
                   const std::function<void(const PathPoint&)>& fn,
                   std::size_t max_paths) {
  if (t < 1 || t > spec.T) throw DomainError("time out of range");
  Walker w(spec, design, max_paths);
  w.on_prefix = fn;
  w.run(t);
}

EvalResult exact_cost(const ProblemSpec& spec, const Design& design,
                      std::size_t max_paths) {
  EvalResult r;
  r.per_stage.assign(spec.T, 0.0);
  Walker w(spec, design, max_paths);
  w.on_prefix = [](const PathPoint&) {};
  w.on_cost = [&](int t, double p, double c) { r.per_stage[t - 1] += p * c; };
  w.run(spec.T + 1);
  for (double c : r.per_stage) r.expected_cost += c;
  return r;
}

SimResult simulate(const ProblemSpec& spec, const Design& design,
                   std::size_t episodes, std::uint64_t seed) {
  if (episodes < 1) throw InputError("episodes must be >= 1");
  const int K = spec.K;
  PrescriptionCache cache(design);
  double mean = 0.0, m2 = 0.0;
  std::vector<std::vector<int>> ys(K), us(K);
  for (std::size_t i = 0; i < episodes; ++i) {
    std::seed_seq sq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                     std::uint32_t(i), std::uint32_t(std::uint64_t(i) >> 32)};
    std::mt19937_64 rng(sq);
    for (int k = 0; k < K; ++k) {
      ys[k].clear();
      us[k].clear();
    }
    CommonHistory delta;
    int x = sample(spec.x0_dist, uniform01(rng));
    double total = 0.0;
    for (int t = 1; t <= spec.T; ++t) {
      for (int k = 0; k < K; ++k) {
        ys[k].push_back(sample(spec.obs[k][t - 1][x], uniform01(rng)));
      }
      const GammaProfile& g = cache.at(t, delta);
      int a = 0;
      for (int k = 0; k < K; ++k) {
        int u = g.tables[k][lambda_rank(spec, k, t, ys[k], us[k])];
        us[k].push_back(u);
        a = a * spec.u_size[k] + u;
      }
      x = sample(spec.trans[t - 1][x][a], uniform01(rng));
      total += spec.cost[t - 1][x][a];
      if (t + 1 > spec.n && t < spec.T) {
        const int tau = t - spec.n + 1;
        std::vector<int> zy(K), zu(K);
        for (int k = 0; k < K; ++k) {
          zy[k] = ys[k][tau - 1];
          zu[k] = us[k][tau - 1];
        }
        delta.push_back(int(common_obs_rank(spec, zy, zu)));
      }
    }
    const double d = total - mean;
    mean += d / double(i + 1);
    m2 += d * (total - mean);
  }
  SimResult r;
  r.episodes = episodes;
  r.seed = seed;
  const double n = double(episodes);
  r.mean = mean;
  if (episodes > 1) r.std_error = std::sqrt(m2 / (n - 1.0) / n);
  return r;
}

std::map<CommonHistory, HistoryConditional> history_conditionals(
    const Layout& layout, const Design& design, int t, std::size_t max_paths) {
  const ProblemSpec& spec = layout.spec();
  const StateSpace& st = layout.states(t);
  const int K = spec.K;
  const int shared = std::max(0, t - spec.n);
  std::map<CommonHistory, HistoryConditional> out;
  PrescriptionCache cache(design);
  std::vector<std::size_t> lam(K);
  for_each_path(
      spec, design, t,
      [&](const PathPoint& pt) {
        auto& h = out[pt.delta];
        if (h.joint_state.empty()) {
          h.joint_state.assign(st.size(), 0.0);
          h.x_shared.assign(spec.x_size, 0.0);
          h.x_prev.assign(spec.x_size, 0.0);
        }
        const int x = pt.x[t - 1];
        int a = 0;
        const GammaProfile& g = cache.at(t, pt.delta);
        for (int k = 0; k < K; ++k) {
          lam[k] = lambda_rank(spec, k, t, pt.y[k], pt.u[k]);
          a = a * spec.u_size[k] + g.tables[k][lam[k]];
        }
        h.prob += pt.p;
        h.joint_state[st.rank(x, lam)] += pt.p;
        h.x_shared[pt.x[shared]] += pt.p;
        h.x_prev[x] += pt.p;
        h.stage_cost += pt.p * layout.stage_cost(t, x, a);
      },
      max_paths);
  for (auto& [delta, h] : out) {
    for (double& v : h.joint_state) v /= h.prob;
    for (double& v : h.x_shared) v /= h.prob;
    for (double& v : h.x_prev) v /= h.prob;
    h.stage_cost /= h.prob;
  }
  return out;
}

double design_count(const ProblemSpec& spec) {
  double count = 1.0;
  for (int k = 0; k < spec.K; ++k) {
    for (int t = 1; t <= spec.T; ++t) {
      const double entries = double(private_layout(spec, k, t).size()) *
                             common_history_count(spec, t);
      count *= std::pow(double(spec.u_size[k]), entries);
    }
  }
  return count;
}

double trajectory_count(const ProblemSpec& spec) {
  double per_stage = spec.x_size;
  for (int k = 0; k < spec.K; ++k) per_stage *= spec.y_size[k];
  return spec.x_size * std::pow(per_stage, spec.T);
}

void for_each_design(const ProblemSpec& spec, double max_designs,
                     const std::function<bool(const ExtensionalDesign&)>& fn) {
  const double count = design_count(spec);
  if (count > max_designs) {
    throw BudgetExceeded("designs", count, max_designs);
  }
  std::vector<std::vector<std::vector<std::vector<int>>>> laws(spec.K);
  struct Slot {
    int k, t;
    std::size_t delta, lambda;
  };
  std::vector<Slot> slots;
  for (int k = 0; k < spec.K; ++k) {
    laws[k].resize(spec.T);
    for (int t = 1; t <= spec.T; ++t) {
      const std::size_t D = std::size_t(common_history_count(spec, t));
      const std::size_t L = private_layout(spec, k, t).size();
      laws[k][t - 1].assign(D, std::vector<int>(L, 0));
      for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t l = 0; l < L; ++l) slots.push_back({k, t, d, l});
      }
    }
  }
  while (true) {
    if (!fn(ExtensionalDesign(spec, laws))) return;
    std::size_t i = slots.size();
    bool done = true;
    while (i-- > 0) {
      const Slot& s = slots[i];
      int& v = laws[s.k][s.t - 1][s.delta][s.lambda];
      if (++v < spec.u_size[s.k]) {
        done = false;
        break;
      }
      v = 0;
    }
    if (done) return;
  }
}

BruteForceResult brute_force_optimum(const ProblemSpec& spec,
                                     double max_designs, double max_work) {
  const double designs = design_count(spec);
  if (designs > max_designs) {
    throw BudgetExceeded("designs", designs, max_designs);
  }
  const double work = designs * trajectory_count(spec);
  if (work > max_work) {
    throw BudgetExceeded("designs x trajectories", work, max_work);
  }
  BruteForceResult best;
  best.cost = std::numeric_limits<double>::infinity();
  best.designs = designs;
  for_each_design(spec, designs, [&](const ExtensionalDesign& d) {
    double c = exact_cost(spec, d).expected_cost;
    if (c < best.cost - 1e-12) {
      best.cost = c;
      best.design = std::make_unique<ExtensionalDesign>(d);
    }
    return true;
  });
  return best;
}

}  // namespace delayshare
