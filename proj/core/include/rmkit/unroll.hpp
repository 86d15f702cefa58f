#ifndef RMKIT_UNROLL_HPP
#define RMKIT_UNROLL_HPP

#include <map>
#include <string>
#include <vector>

#include "rmkit/reward_machine.hpp"

namespace rmkit {

struct TranslationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Maps each numeric variable to the ordered list of boolean features naming
/// its unordered subtasks (one feature per countable subtask).
using SubtaskBindings = std::map<std::string, std::vector<std::string>>;

/// Unrolls a numeric RM into a Boolean RM by expanding each numeric event
/// into one concrete transition per remaining subtask. Distinct completion
/// histories yield distinct states; no merging is performed.
RewardMachine unroll_to_boolean(const RewardMachine& num_rm,
                                const SubtaskBindings& bindings);

/// Same unrolling, but states are keyed by their <d, T, x> label, so
/// symmetric states (equal labels) merge into one.
RewardMachine unroll_to_agenda(const RewardMachine& num_rm,
                               const SubtaskBindings& bindings);

/// Splits every agenda state whose objective is the whole agenda into one
/// state per remaining subtask; the split states form a coupled group.
RewardMachine split_to_coupled(const RewardMachine& agenda_rm);

}  // namespace rmkit

#endif
