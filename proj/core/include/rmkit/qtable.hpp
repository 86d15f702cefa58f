#ifndef RMKIT_QTABLE_HPP
#define RMKIT_QTABLE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "rmkit/grid.hpp"

namespace rmkit {

/// Tabular action-value function over product keys. Absent rows read as the
/// optimistic initial value.
struct QTable {
  double init_value = 1.0;
  std::unordered_map<uint64_t, std::array<double, kNumActions>> values;

  std::array<double, kNumActions>& row(uint64_t key);
  double value(uint64_t key, int action) const;
  double max_value(uint64_t key) const;
  /// Argmax with uniform random tie-breaking.
  int greedy_action(uint64_t key, std::mt19937_64& rng) const;
  void update(uint64_t key, int action, double target, double alpha);
};

/// Minimum observed steps from an RM state to a goal state. Absent entries
/// are unvisited (+infinity); recorded values never increase.
struct EtaTable {
  std::unordered_map<int, long> values;

  std::optional<long> get(int rm_state) const;
  void observe(int rm_state, long steps);
};

inline constexpr long kUnknownLength = -1;

/// Parameters of the episode-length final reward.
struct RewardParams {
  double gamma = 0.9;
  int window = -1;  // penalty window; -1 disables length sensitivity
  double r_min = 0.0;
  double r_max = 0.0;
  long best_length = kUnknownLength;  // shortest goal episode so far
};

/// Deferred reward for completing a subtask in an episode of length K, where
/// K_x is the number of steps the subtask itself took. Returns 1 when the
/// episode matches the best known length (or the window is disabled), and
/// decays toward a window-clamped floor as the episode grows longer.
double final_reward(long K, long K_x, const RewardParams& p);

/// One deferred RM-transition experience awaiting the episode length.
struct BufferedTransition {
  uint64_t product_key = 0;  // <s, completed subtask> at the decision
  int action = 0;
  int rm_state_left = -1;  // the coupled member whose guard fired
  int subtask = -1;        // index into the subtask universe
  long step_index = 0;     // environment step at which the transition fired
  long subtask_steps = 0;  // K_x: steps since the previous RM transition
  bool exploit = false;
};

struct TransitionBuffer {
  std::vector<BufferedTransition> entries;
  void clear() { entries.clear(); }
};

}  // namespace rmkit

#endif
