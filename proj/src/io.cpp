#include "delayshare/io.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "delayshare/errors.hpp"

namespace delayshare {

using ojson = nlohmann::ordered_json;

namespace {

ojson solution_skeleton(const Layout& layout, const DpSolution& sol,
                        const char* form, std::size_t nodes, std::size_t edges,
                        const std::function<void(int, std::size_t, ojson&)>& state) {
  const ProblemSpec& spec = layout.spec();
  ojson j;
  j["format"] = "delayshare-solution";
  j["form"] = form;
  j["K"] = spec.K;
  j["T"] = spec.T;
  j["n"] = spec.n;
  j["optimal_cost"] = sol.optimal_cost;
  j["graph"] = {{"nodes", nodes}, {"edges", edges}};
  ojson stages = ojson::array();
  for (int t = 1; t <= spec.T; ++t) {
    ojson st;
    st["t"] = t;
    ojson list = ojson::array();
    for (std::size_t node = 0; node < sol.values.J[t - 1].size(); ++node) {
      ojson nj;
      nj["id"] = node;
      state(t, node, nj);
      nj["J"] = sol.values.J[t - 1][node];
      nj["argmin_rank"] = sol.values.argmin[t - 1][node];
      nj["profile"] = sol.policy.profiles[t - 1][node].tables;
      ojson ch = ojson::array();
      if (t < spec.T) {
        const auto& row = sol.children[t - 1][node];
        for (std::size_t z = 0; z < row.size(); ++z) {
          if (row[z] < 0) continue;
          ch.push_back({{"z", z}, {"child", row[z]}, {"pz", sol.pz[t - 1][node][z]}});
        }
      }
      nj["children"] = std::move(ch);
      list.push_back(std::move(nj));
    }
    st["nodes"] = std::move(list);
    stages.push_back(std::move(st));
  }
  j["stages"] = std::move(stages);
  return j;
}

template <typename T>
T get_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw SchemaError(std::string("design file: missing field \"") + key + "\"");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("design file: field \"") + key + "\": " +
                      e.what());
  }
}

std::unique_ptr<Design> load_policy(const ProblemSpec& spec,
                                    const nlohmann::json& j) {
  if (get_field<int>(j, "K") != spec.K || get_field<int>(j, "T") != spec.T ||
      get_field<int>(j, "n") != spec.n) {
    throw SchemaError("solution file does not match the problem dimensions");
  }
  const auto& stages = j.at("stages");
  if (!stages.is_array() || int(stages.size()) != spec.T) {
    throw SchemaError("solution file: stage count");
  }
  CoordinatorPolicy policy;
  std::vector<std::vector<std::vector<int>>> children(spec.T);
  policy.profiles.resize(spec.T);
  policy.ranks.resize(spec.T);
  for (int t = 1; t <= spec.T; ++t) {
    const auto& nodes = stages[t - 1].at("nodes");
    const std::size_t Z = t < spec.T ? common_obs_count(spec, t + 1) : 0;
    for (const auto& nj : nodes) {
      GammaProfile g;
      g.t = t;
      g.tables = get_field<std::vector<std::vector<int>>>(nj, "profile");
      if (int(g.tables.size()) != spec.K) {
        throw SchemaError("solution file: profile arity");
      }
      for (int k = 0; k < spec.K; ++k) {
        if (g.tables[k].size() != private_layout(spec, k, t).size()) {
          throw SchemaError("solution file: profile table size");
        }
        for (int a : g.tables[k]) {
          if (a < 0 || a >= spec.u_size[k]) {
            throw SchemaError("solution file: action out of range");
          }
        }
      }
      policy.ranks[t - 1].push_back(get_field<std::uint64_t>(nj, "argmin_rank"));
      policy.profiles[t - 1].push_back(std::move(g));
      std::vector<int> row(Z, -1);
      for (const auto& cj : nj.at("children")) {
        const auto z = get_field<std::size_t>(cj, "z");
        const int child = get_field<int>(cj, "child");
        if (z >= Z) throw SchemaError("solution file: child observation index");
        row[z] = child;
      }
      children[t - 1].push_back(std::move(row));
    }
  }
  for (int t = 1; t < spec.T; ++t) {
    for (const auto& row : children[t - 1]) {
      for (int c : row) {
        if (c >= int(policy.profiles[t].size())) {
          throw SchemaError("solution file: child node out of range");
        }
      }
    }
  }
  if (policy.profiles[0].empty()) throw SchemaError("solution file: no root");
  return std::make_unique<PolicyDesign>(spec, std::move(policy),
                                        std::move(children));
}

}  // namespace

std::string solution_json(const Layout& layout, const BeliefGraph& graph,
                          const DpSolution& solution) {
  ojson j = solution_skeleton(
      layout, solution, "belief", graph.node_count(), graph.edge_count(),
      [&](int t, std::size_t node, ojson& nj) {
        nj["belief"] = graph.beliefs[t - 1][node];
      });
  return j.dump(1) + "\n";
}

std::string solution_json(const Layout& layout, const ThetaRGraph& graph,
                          const DpSolution& solution) {
  ojson j = solution_skeleton(
      layout, solution, "theta_r", graph.node_count(), graph.edge_count(),
      [&](int t, std::size_t node, ojson& nj) {
        const ThetaRState& s = graph.nodes[t - 1][node];
        nj["theta"] = s.theta.p;
        ojson r = ojson::array();
        for (const auto& suffix : s.r) {
          r.push_back({{"first_m", suffix.first_m}, {"parts", suffix.parts}});
        }
        nj["r"] = std::move(r);
      });
  return j.dump(1) + "\n";
}

std::string design_json(const ExtensionalDesign& design) {
  ojson j;
  j["format"] = "delayshare-design";
  j["laws"] = design.laws();
  return j.dump(1) + "\n";
}

std::unique_ptr<Design> load_design(const ProblemSpec& spec,
                                    std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("design file: ") + e.what());
  }
  const std::string format = j.is_object() && j.contains("format") &&
                                     j["format"].is_string()
                                 ? j["format"].get<std::string>()
                                 : "";
  try {
    if (format == "delayshare-solution") return load_policy(spec, j);
    if (format == "delayshare-design") {
      using Laws = std::vector<std::vector<std::vector<std::vector<int>>>>;
      return std::make_unique<ExtensionalDesign>(spec,
                                                 get_field<Laws>(j, "laws"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("design file: ") + e.what());
  }
  throw SchemaError(
      "design file: \"format\" must be delayshare-solution or delayshare-design");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::unique_ptr<Design> read_design_file(const ProblemSpec& spec,
                                         const std::string& path) {
  return load_design(spec, read_text_file(path));
}

}  // namespace delayshare
