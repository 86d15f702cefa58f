#ifndef RMKIT_ORACLE_HPP
#define RMKIT_ORACLE_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rmkit/grid.hpp"
#include "rmkit/reward_machine.hpp"

namespace rmkit {

struct SearchBudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Length of a shortest action sequence that drives the product of the
/// environment and the reward machine to a positive-reward terminal
/// transition. Returns -1 if no such sequence exists. Works for all machine
/// kinds; coupled machines are tracked per group. Throws SearchBudgetError
/// when the visited set exceeds `max_nodes`.
int bfs_optimal_length(const GridMap& map, const RewardMachine& rm,
                       size_t max_nodes = 5'000'000);

}  // namespace rmkit

#endif
