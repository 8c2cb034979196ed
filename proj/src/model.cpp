#include "delayshare/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "delayshare/errors.hpp"

namespace delayshare {

using nlohmann::json;

namespace {

constexpr double kRowTolerance = 1e-9;

const json& require(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw SchemaError(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

int read_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) {
    throw SchemaError("expected integer at " + path);
  }
  return j.get<int>();
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw SchemaError("expected number at " + path);
  }
  return j.get<double>();
}

const json& read_array(const json& j, const std::string& path) {
  if (!j.is_array()) {
    throw SchemaError("expected array at " + path);
  }
  return j;
}

std::vector<int> read_int_array(const json& j, const std::string& path) {
  std::vector<int> out;
  const auto& arr = read_array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(read_int(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vec read_vec(const json& j, const std::string& path) {
  Vec out;
  const auto& arr = read_array(j, path);
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(read_number(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

// Reads nested arrays of the given depth whose leaves are numbers.
template <int Depth>
auto read_nested(const json& j, const std::string& path) {
  if constexpr (Depth == 1) {
    return read_vec(j, path);
  } else {
    using Inner = decltype(read_nested<Depth - 1>(j, path));
    std::vector<Inner> out;
    const auto& arr = read_array(j, path);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      out.push_back(
          read_nested<Depth - 1>(arr[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
}

std::string idx(std::initializer_list<std::size_t> parts) {
  std::string s;
  for (auto p : parts) s += "[" + std::to_string(p) + "]";
  return s;
}

void check_row(const Vec& row, std::size_t expected, const std::string& path,
               std::vector<Violation>& out) {
  if (row.size() != expected) {
    out.push_back({path, static_cast<double>(row.size()),
                   "length " + std::to_string(row.size()) + ", expected " +
                       std::to_string(expected)});
    return;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!std::isfinite(row[i])) {
      out.push_back({path + idx({i}), row[i], "non-finite probability"});
      return;
    }
    if (row[i] < 0.0) {
      out.push_back({path + idx({i}), row[i], "negative probability"});
    }
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kRowTolerance) {
    out.push_back({path, sum, "row sums to " + std::to_string(sum)});
  }
}

template <typename V>
bool check_extent(const V& v, std::size_t expected, const std::string& path,
                  std::vector<Violation>& out) {
  if (v.size() == expected) return true;
  out.push_back({path, static_cast<double>(v.size()),
                 "extent " + std::to_string(v.size()) + ", expected " +
                     std::to_string(expected)});
  return false;
}

void normalize_row(Vec& row) {
  double sum = 0.0;
  for (double p : row) sum += p;
  if (sum > 0.0) {
    for (double& p : row) p /= sum;
  }
}

}  // namespace

std::string BudgetExceeded::format_count(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

int ProblemSpec::joint_actions() const {
  int a = 1;
  for (int u : u_size) a *= u;
  return a;
}

int joint_action_index(const ProblemSpec& spec, std::span<const int> u) {
  if (static_cast<int>(u.size()) != spec.K) {
    throw DomainError("joint action arity mismatch");
  }
  int index = 0;
  for (int k = 0; k < spec.K; ++k) {
    if (u[k] < 0 || u[k] >= spec.u_size[k]) {
      throw DomainError("action out of range for controller " +
                        std::to_string(k + 1));
    }
    index = index * spec.u_size[k] + u[k];
  }
  return index;
}

JointAction joint_action(const ProblemSpec& spec, int index) {
  if (index < 0 || index >= spec.joint_actions()) {
    throw DomainError("joint action index out of range");
  }
  JointAction a;
  a.index = index;
  a.u.assign(spec.K, 0);
  for (int k = spec.K - 1; k >= 0; --k) {
    a.u[k] = index % spec.u_size[k];
    index /= spec.u_size[k];
  }
  return a;
}

ProblemSpec load_problem(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError("problem file, line " + std::to_string(line) + ": " +
                     e.what());
  }
  if (!j.is_object()) {
    throw SchemaError("problem file must be a JSON object");
  }
  ProblemSpec spec;
  spec.K = read_int(require(j, "K"), "K");
  spec.T = read_int(require(j, "T"), "T");
  spec.n = read_int(require(j, "n"), "n");
  spec.x_size = read_int(require(j, "x_size"), "x_size");
  spec.y_size = read_int_array(require(j, "y_size"), "y_size");
  spec.u_size = read_int_array(require(j, "u_size"), "u_size");
  spec.x0_dist = read_vec(require(j, "x0_dist"), "x0_dist");
  spec.trans = read_nested<4>(require(j, "trans"), "trans");
  spec.obs = read_nested<4>(require(j, "obs"), "obs");
  spec.cost = read_nested<3>(require(j, "cost"), "cost");
  return spec;
}

std::string serialize_problem(const ProblemSpec& spec) {
  nlohmann::ordered_json j;
  j["K"] = spec.K;
  j["T"] = spec.T;
  j["n"] = spec.n;
  j["x_size"] = spec.x_size;
  j["y_size"] = spec.y_size;
  j["u_size"] = spec.u_size;
  j["x0_dist"] = spec.x0_dist;
  j["trans"] = spec.trans;
  j["obs"] = spec.obs;
  j["cost"] = spec.cost;
  return j.dump(1) + "\n";
}

std::vector<Violation> validate_problem(const ProblemSpec& spec) {
  std::vector<Violation> out;
  auto scalar = [&](const char* name, int v, int min) {
    if (v < min) {
      out.push_back({name, static_cast<double>(v),
                     std::string(name) + " must be >= " + std::to_string(min)});
    }
  };
  scalar("K", spec.K, 1);
  scalar("T", spec.T, 1);
  scalar("n", spec.n, 1);
  scalar("x_size", spec.x_size, 1);
  if (!out.empty()) return out;

  bool shapes_ok = check_extent(spec.y_size, spec.K, "y_size", out);
  shapes_ok = check_extent(spec.u_size, spec.K, "u_size", out) && shapes_ok;
  if (!shapes_ok) return out;
  for (int k = 0; k < spec.K; ++k) {
    if (spec.y_size[k] < 1) {
      out.push_back({"y_size" + idx({std::size_t(k)}),
                     double(spec.y_size[k]), "alphabet size must be >= 1"});
    }
    if (spec.u_size[k] < 1) {
      out.push_back({"u_size" + idx({std::size_t(k)}),
                     double(spec.u_size[k]), "alphabet size must be >= 1"});
    }
  }
  if (!out.empty()) return out;

  const std::size_t X = spec.x_size;
  const std::size_t T = spec.T;
  const std::size_t A = spec.joint_actions();

  check_row(spec.x0_dist, X, "x0_dist", out);

  if (check_extent(spec.trans, T, "trans", out)) {
    for (std::size_t t = 0; t < T; ++t) {
      if (!check_extent(spec.trans[t], X, "trans" + idx({t}), out)) continue;
      for (std::size_t x = 0; x < X; ++x) {
        if (!check_extent(spec.trans[t][x], A, "trans" + idx({t, x}), out)) {
          continue;
        }
        for (std::size_t a = 0; a < A; ++a) {
          check_row(spec.trans[t][x][a], X, "trans" + idx({t, x, a}), out);
        }
      }
    }
  }

  if (check_extent(spec.obs, spec.K, "obs", out)) {
    for (std::size_t k = 0; k < std::size_t(spec.K); ++k) {
      if (!check_extent(spec.obs[k], T, "obs" + idx({k}), out)) continue;
      for (std::size_t t = 0; t < T; ++t) {
        if (!check_extent(spec.obs[k][t], X, "obs" + idx({k, t}), out)) {
          continue;
        }
        for (std::size_t x = 0; x < X; ++x) {
          check_row(spec.obs[k][t][x], spec.y_size[k], "obs" + idx({k, t, x}),
                    out);
        }
      }
    }
  }

  if (check_extent(spec.cost, T, "cost", out)) {
    for (std::size_t t = 0; t < T; ++t) {
      if (!check_extent(spec.cost[t], X, "cost" + idx({t}), out)) continue;
      for (std::size_t x = 0; x < X; ++x) {
        if (!check_extent(spec.cost[t][x], A, "cost" + idx({t, x}), out)) {
          continue;
        }
        for (std::size_t a = 0; a < A; ++a) {
          if (!std::isfinite(spec.cost[t][x][a])) {
            out.push_back({"cost" + idx({t, x, a}), spec.cost[t][x][a],
                           "non-finite cost"});
          }
        }
      }
    }
  }
  return out;
}

ProblemSpec normalized(ProblemSpec spec) {
  normalize_row(spec.x0_dist);
  for (auto& per_t : spec.trans) {
    for (auto& per_x : per_t) {
      for (auto& row : per_x) normalize_row(row);
    }
  }
  for (auto& per_k : spec.obs) {
    for (auto& per_t : per_k) {
      for (auto& row : per_t) normalize_row(row);
    }
  }
  return spec;
}

ProblemSpec prepare_problem(std::string_view text) {
  ProblemSpec spec = load_problem(text);
  auto violations = validate_problem(spec);
  if (!violations.empty()) {
    std::string msg = "invalid problem:";
    for (const auto& v : violations) {
      msg += "\n  " + v.path + ": " + v.message;
    }
    throw SchemaError(msg);
  }
  return normalized(std::move(spec));
}

ProblemSpec read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return prepare_problem(ss.str());
}

Window window(int t, const ProblemSpec& spec) {
  if (t < 1 || t > spec.T) {
    throw DomainError("time " + std::to_string(t) + " outside [1, " +
                      std::to_string(spec.T) + "]");
  }
  Window w;
  w.obs_lo = std::max(1, t - spec.n + 1);
  w.obs_hi = t;
  w.act_lo = w.obs_lo;
  w.act_hi = t - 1;
  w.shared_horizon = std::max(0, t - spec.n);
  return w;
}

}  // namespace delayshare
