#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "delayshare/analysis.hpp"
#include "delayshare/coordinator.hpp"
#include "delayshare/errors.hpp"
#include "delayshare/evaluate.hpp"
#include "delayshare/instances.hpp"
#include "delayshare/io.hpp"
#include "delayshare/second_form.hpp"
#include "delayshare/verify.hpp"

namespace py = pybind11;
using namespace delayshare;

namespace {

// Owns the layout and, once solved, the coordinator solutions.
class Solver {
 public:
  explicit Solver(const ProblemSpec& spec)
      : layout_(std::make_unique<Layout>(normalized(spec))) {}

  py::dict solve(bool second) {
    py::dict out;
    if (second) {
      ThetaRGraph g = reachable_graph2(*layout_, budget_);
      dp2_ = std::make_unique<DpSolution>(solve_dp2(*layout_, g));
      json2_ = solution_json(*layout_, g, *dp2_);
      out["optimal_cost"] = dp2_->optimal_cost;
      out["nodes"] = g.node_count();
      out["edges"] = g.edge_count();
    } else {
      BeliefGraph g = reachable_graph(*layout_, budget_);
      dp1_ = std::make_unique<DpSolution>(solve_dp(*layout_, g));
      json1_ = solution_json(*layout_, g, *dp1_);
      out["optimal_cost"] = dp1_->optimal_cost;
      out["nodes"] = g.node_count();
      out["edges"] = g.edge_count();
    }
    return out;
  }

  std::string solution(bool second) {
    if (second ? !dp2_ : !dp1_) solve(second);
    return second ? json2_ : json1_;
  }

  std::unique_ptr<PolicyDesign> design(bool second) {
    if (second ? !dp2_ : !dp1_) solve(second);
    return second ? extract_design2(*layout_, *dp2_) : extract_design(*layout_, *dp1_);
  }

  double value(int t, const Vec& belief) {
    ValueOracle oracle(*layout_);
    return oracle.value(PiBelief{t, belief});
  }

  Vec initial_belief_vec() const { return initial_belief(*layout_).p; }

  py::tuple update(const Vec& belief, int t, std::uint64_t profile, std::size_t z) const {
    GammaProfile g = profile_at(layout_->spec(), t, profile);
    BeliefStep s = belief_update(*layout_, PiBelief{t, belief}, g, z);
    return py::make_tuple(s.next.p, s.pz);
  }

  const Layout& layout() const { return *layout_; }
  GraphBudget budget_;

 private:
  std::unique_ptr<Layout> layout_;
  std::unique_ptr<DpSolution> dp1_, dp2_;
  std::string json1_, json2_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coordinator solvers for decentralized control with delayed sharing";

  auto input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<UnreachableObservation>(m, "UnreachableObservation", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_IndexError);
  (void)input_error;

  py::class_<ProblemSpec>(m, "Problem")
      .def_static("from_json", &prepare_problem, py::arg("text"),
                  "Parse, validate and renormalize.")
      .def_static(
          "parse", [](const std::string& text) { return load_problem(text); },
          py::arg("text"), "Parse only; inverts to_json exactly.")
      .def_static("read", &read_problem_file, py::arg("path"))
      .def_static("canonical", &canonical_instance, py::arg("name"))
      .def_static(
          "random",
          [](int K, int T, int n, int x_size, std::vector<int> y_size,
             std::vector<int> u_size, std::uint64_t seed) {
            return random_instance({K, T, n, x_size, std::move(y_size), std::move(u_size)}, seed);
          },
          py::arg("K"), py::arg("T"), py::arg("n"), py::arg("x_size"), py::arg("y_size"),
          py::arg("u_size"), py::arg("seed"))
      .def("to_json", &serialize_problem)
      .def("validate",
           [](const ProblemSpec& s) {
             py::list out;
             for (const auto& v : validate_problem(s))
               out.append(py::make_tuple(v.path, v.observed, v.message));
             return out;
           })
      .def("design_count", &design_count)
      .def_readonly("K", &ProblemSpec::K)
      .def_readonly("T", &ProblemSpec::T)
      .def_readonly("n", &ProblemSpec::n)
      .def_readonly("x_size", &ProblemSpec::x_size)
      .def_readonly("y_size", &ProblemSpec::y_size)
      .def_readonly("u_size", &ProblemSpec::u_size)
      .def_readonly("x0_dist", &ProblemSpec::x0_dist)
      .def_readonly("trans", &ProblemSpec::trans)
      .def_readonly("obs", &ProblemSpec::obs)
      .def_readonly("cost", &ProblemSpec::cost)
      .def("__eq__", [](const ProblemSpec& a, const ProblemSpec& b) { return a == b; });

  m.def("canonical_names", &canonical_instance_names);

  py::class_<Solver>(m, "Solver")
      .def(py::init<const ProblemSpec&>(), py::arg("problem"))
      .def_property(
          "max_nodes", [](const Solver& s) { return s.budget_.max_nodes; },
          [](Solver& s, std::size_t v) { s.budget_.max_nodes = v; })
      .def("solve", [](Solver& s) { return s.solve(false); })
      .def("solve2", [](Solver& s) { return s.solve(true); })
      .def("solution_json", &Solver::solution, py::arg("second_form") = false)
      .def(
          "exact_cost",
          [](Solver& s, bool second) {
            return exact_cost(s.layout().spec(), *s.design(second)).expected_cost;
          },
          py::arg("second_form") = false)
      .def(
          "simulate",
          [](Solver& s, std::size_t episodes, std::uint64_t seed) {
            SimResult r = simulate(s.layout().spec(), *s.design(false), episodes, seed);
            return py::make_tuple(r.mean, r.std_error);
          },
          py::arg("episodes"), py::arg("seed"))
      .def("initial_belief", &Solver::initial_belief_vec)
      .def("belief_update", &Solver::update, py::arg("belief"), py::arg("t"),
           py::arg("profile_rank"), py::arg("z"))
      .def("value", &Solver::value, py::arg("t"), py::arg("belief"))
      .def(
          "concavity",
          [](Solver& s, std::size_t samples, std::uint64_t seed) {
            return concavity_probe(s.layout(), samples, seed).worst;
          },
          py::arg("samples") = 100, py::arg("seed") = 7)
      .def("kurtaran", [](Solver& s) {
        KurtaranReport r = kurtaran_witness_search(s.layout().spec(), *s.design(false));
        py::dict out;
        out["histories"] = r.histories;
        out["comparisons"] = r.comparisons;
        out["witness"] = bool(r.witness);
        out["verified"] = r.witness ? r.witness->verified : false;
        return out;
      });

  m.def(
      "brute_force",
      [](const ProblemSpec& spec, double max_designs) {
        BruteForceResult r = brute_force_optimum(spec, max_designs, 1e12);
        return py::make_tuple(r.cost, r.designs);
      },
      py::arg("problem"), py::arg("max_designs") = 1e5);

  m.def(
      "verify",
      [](const ProblemSpec& spec, std::uint64_t seed, std::size_t samples,
         std::size_t episodes) {
        VerifyOptions opt;
        opt.seed = seed;
        opt.samples = samples;
        opt.episodes = episodes;
        VerifyReport r = verify_instance(spec, opt);
        return py::make_tuple(r.passed(), r.text());
      },
      py::arg("problem"), py::arg("seed") = 7, py::arg("samples") = 100,
      py::arg("episodes") = 100000);
}
