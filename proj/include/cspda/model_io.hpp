#pragma once

#include <string>

#include "cspda/types.hpp"

namespace cspda {

/// Model files are JSON with this canonical field order:
///   format, num_states, num_actions, num_constraints, discount, g_max,
///   initial_dist, reward, constraint_costs, transition
/// where reward is S rows of A values, constraint_costs is I tables of
/// S rows of A values, transition is A matrices of S rows of S values
/// (transition[a][s][s'] = P(s'|s,a)).
///
/// The loader validates every model invariant and throws
/// std::invalid_argument naming the first violated one with its indices.

void save_model(const CmdpModel& model, const std::string& path);
CmdpModel load_model(const std::string& path);

std::string model_to_json(const CmdpModel& model);
CmdpModel model_from_json(const std::string& text);

}  // namespace cspda
