#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "delayshare/coordinator.hpp"
#include "delayshare/histories.hpp"
#include "delayshare/second_form.hpp"

namespace delayshare {

/// Solution files: per-stage nodes with their information state, value,
/// chosen profile and policy children. Key order is fixed so identical
/// solutions serialize to identical bytes.
std::string solution_json(const Layout& layout, const BeliefGraph& graph,
                          const DpSolution& solution);
std::string solution_json(const Layout& layout, const ThetaRGraph& graph,
                          const DpSolution& solution);

std::string design_json(const ExtensionalDesign& design);

/// Accepts either an extensional design file or a solution file (replayed
/// as a policy design). Throws InputError subclasses on malformed input.
std::unique_ptr<Design> load_design(const ProblemSpec& spec,
                                    std::string_view text);
std::unique_ptr<Design> read_design_file(const ProblemSpec& spec,
                                         const std::string& path);

std::string read_text_file(const std::string& path);

}  // namespace delayshare
