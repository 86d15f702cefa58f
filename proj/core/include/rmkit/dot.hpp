#ifndef RMKIT_DOT_HPP
#define RMKIT_DOT_HPP

#include <string>

#include "rmkit/reward_machine.hpp"

namespace rmkit {

/// Renders the machine as a Graphviz digraph. Coupled groups become dashed
/// red clusters; output is deterministic for a given machine.
std::string export_dot(const RewardMachine& rm);

}  // namespace rmkit

#endif
