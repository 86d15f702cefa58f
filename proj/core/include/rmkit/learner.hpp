#ifndef RMKIT_LEARNER_HPP
#define RMKIT_LEARNER_HPP

#include <random>
#include <set>
#include <string>
#include <vector>

#include "rmkit/grid.hpp"
#include "rmkit/qtable.hpp"
#include "rmkit/reward_machine.hpp"

namespace rmkit {

enum class Algo { QRM, CRM, CoRM };

std::string to_string(Algo a);
Algo parse_algo(const std::string& name);

struct Hyperparams {
  double alpha = 0.5;
  double epsilon = 0.1;
  double gamma = 0.9;
  double xi = 0.1;
  double q_init = 1.0;
  int lambda = -1;  // final-reward window; -1 = constant reward 1
  long episode_cap = 1000;
  bool corm_counterfactual = true;  // lifted updates for out-of-group subtasks
  double r_min = 0.0;
  double r_max = 0.0;
};

struct EpisodeRecord {
  long length = 0;
  bool success = false;
  bool env_failed = false;
  double total_reward = 0.0;
};

/// High-level choice at a coupled group: the objective to pursue and whether
/// the decision was an exploit (eta-minimising) draw.
struct HighLevelChoice {
  int member = -1;  // chosen group member state
  bool exploit = true;
};

/// One tabular learning run: a QRM, CRM, or CoRM agent bound to a map and a
/// reward machine. All mutable state (tables, RNG, counters) lives here.
class Learner {
 public:
  Learner(Algo algo, GridMap map, RewardMachine rm, Hyperparams hp,
          uint64_t seed);

  /// Runs one learning episode, stopping early if `max_steps` environment
  /// steps are taken first (a cut episode counts as a failure).
  EpisodeRecord run_episode(long max_steps);

  /// Runs the greedy policy (epsilon = 0, xi = 0) once without mutating the
  /// learner; tie-breaks draw from the supplied generator.
  EpisodeRecord greedy_episode(std::mt19937_64& probe_rng) const;

  const GridMap& map() const { return map_; }
  const RewardMachine& machine() const { return rm_; }
  Algo algo() const { return algo_; }
  const Hyperparams& hyperparams() const { return hp_; }
  const std::vector<std::string>& subtask_universe() const {
    return universe_;
  }

  long total_steps() const { return total_steps_; }
  long total_updates() const { return total_updates_; }
  /// Peak number of table updates performed for a single environment step.
  long peak_step_updates() const { return peak_step_updates_; }
  long episodes() const { return episodes_; }
  double cumulative_reward() const { return cumulative_reward_; }

  /// Exposed state, serialised by the checkpoint module.
  QTable q;
  EtaTable eta;
  RewardParams reward;
  std::set<int> used_transitions;  // fired progress-transition indices
  std::mt19937_64 rng;

  /// Selects the objective to pursue at a coupled group: with probability
  /// 1 - xi the eta-minimising member (ties uniform, unvisited states lose
  /// to visited ones), otherwise a uniform member biased toward ones whose
  /// progress transition has never fired.
  HighLevelChoice high_level_select(int group, std::mt19937_64& gen,
                                    double xi) const;

  /// RM states whose value is updated by a CRM step from `s`: every state
  /// except non-terminals that still wait on an already-consumed event.
  std::vector<int> reachable_states(const GridState& s) const;

  uint64_t product_key(const GridState& s, int rm_pos) const;
  uint64_t subtask_key(const GridState& s, int subtask) const;
  int subtask_index(const std::string& name) const;

  void restore_counters(long steps, long updates, long peak_step_updates,
                        long episodes, double cumulative_reward);

 private:
  struct StepPlan {
    uint64_t key;
    int action;
  };

  int epsilon_greedy(uint64_t key, std::mt19937_64& gen, double epsilon) const;
  bool member_unused(int member) const;

  Algo algo_;
  GridMap map_;
  RewardMachine rm_;
  Hyperparams hp_;
  FeatureCatalog catalog_;
  std::vector<std::string> universe_;      // subtasks then boolean objectives
  std::vector<int> member_subtask_;        // rm state -> universe index or -1

  long total_steps_ = 0;
  long total_updates_ = 0;
  long peak_step_updates_ = 0;
  long episodes_ = 0;
  double cumulative_reward_ = 0.0;

  friend struct CheckpointCodec;
};

}  // namespace rmkit

#endif
