#include "rmkit/oracle.hpp"

#include <deque>
#include <unordered_set>

namespace rmkit {

int bfs_optimal_length(const GridMap& map, const RewardMachine& rm,
                       size_t max_nodes) {
  const bool coupled = rm.kind == RmKind::Coupled;

  struct Node {
    GridState env;
    int rm_pos;  // state id, or group index for coupled machines
    int depth;
  };

  GridState start = env_reset(map);
  int start_pos = coupled ? rm.initial_group() : rm.initial;
  auto key = [&](const GridState& s, int pos) {
    return encode_state(map, s) | ((uint64_t)pos << 40);
  };

  std::unordered_set<uint64_t> visited{key(start, start_pos)};
  std::deque<Node> queue{{start, start_pos, 0}};

  while (!queue.empty()) {
    Node cur = queue.front();
    queue.pop_front();
    for (int a = 0; a < kNumActions; ++a) {
      StepOutcome out = env_step(cur.env, (Action)a, map);
      if (out.terminated) continue;  // environment failure
      RmStepResult step =
          coupled ? rm_step_group(rm, cur.rm_pos, out.assignment)
                  : rm_step(rm, coupled ? 0 : cur.rm_pos, out.assignment);
      if (step.fired && rm.is_terminal(step.next)) {
        if (step.reward > 0) return cur.depth + 1;
        continue;  // zero-reward terminal: dead end
      }
      int pos;
      if (coupled)
        pos = step.fired ? rm.group_of[step.next] : cur.rm_pos;
      else
        pos = step.next;
      uint64_t k = key(out.next, pos);
      if (!visited.insert(k).second) continue;
      if (visited.size() > max_nodes)
        throw SearchBudgetError("product search exceeded node budget");
      queue.push_back({out.next, pos, cur.depth + 1});
    }
  }
  return -1;
}

}  // namespace rmkit
