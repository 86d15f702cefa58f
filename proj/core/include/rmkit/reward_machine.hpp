#ifndef RMKIT_REWARD_MACHINE_HPP
#define RMKIT_REWARD_MACHINE_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rmkit/guard.hpp"

namespace rmkit {

using StateId = int;

enum class RmKind { Boolean, Numeric, Agenda, Coupled };

std::string to_string(RmKind k);

/// Per-state label <d, T, x>: BFS depth, remaining unordered subtasks, and
/// the current objective. Objectives are the whole agenda, a single subtask,
/// a boolean feature, or nothing (terminal states).
struct StateLabel {
  enum class Objective { None, Agenda, Subtask, Feature };

  int depth = 0;
  std::vector<std::string> agenda;  // kept sorted, canonical
  Objective objective = Objective::None;
  std::string objective_name;  // subtask or feature name

  std::string to_string() const;

  auto key() const {
    return std::tie(depth, agenda, objective, objective_name);
  }
  bool operator==(const StateLabel& o) const { return key() == o.key(); }
  bool operator<(const StateLabel& o) const { return key() < o.key(); }
};

/// A reward machine: guarded finite automaton with transition-attached
/// rewards. Unmatched truth assignments self-loop with reward 0, so the
/// step semantics are total. Terminal states carry no outgoing transitions.
struct RewardMachine {
  struct Transition {
    StateId source;
    Guard guard;
    double reward;
    StateId target;
  };

  RmKind kind = RmKind::Boolean;
  std::vector<std::string> state_names;
  std::vector<bool> terminal;  // parallel to state_names
  StateId initial = 0;
  std::vector<Transition> transitions;

  std::vector<std::string> boolean_features;
  std::vector<NumericVariable> numeric_variables;

  /// Optional labels (required for Agenda/Coupled machines, also populated
  /// by the unroller for Boolean machines to support reachability filters).
  std::map<StateId, StateLabel> labels;

  /// Coupled-state partition. Every state belongs to exactly one group;
  /// unsplit states form singleton groups. Empty for non-coupled machines.
  std::vector<std::vector<StateId>> groups;
  std::vector<int> group_of;  // state -> group index

  int state_count() const { return (int)state_names.size(); }
  bool is_terminal(StateId u) const { return terminal[u]; }
  StateId add_state(std::string name, bool is_terminal_state = false);
  std::optional<StateId> find_state(const std::string& name) const;
  std::vector<const Transition*> outgoing(StateId u) const;
  const NumericVariable* find_variable(const std::string& name) const;
  bool has_boolean_feature(const std::string& name) const;

  /// Rebuilds singleton groups for every state (identity partition).
  void make_singleton_groups();
  int initial_group() const { return group_of.empty() ? 0 : group_of[initial]; }
};

struct RmStepResult {
  StateId next;
  double reward = 0.0;
  std::optional<int> fired;  ///< index into transitions, if any guard matched
  StateId fired_member = -1;  ///< which group member's guard fired (coupled)
};

struct DeterminismViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Advances a single RM state on a truth assignment. At most one guard may
/// match (otherwise the machine is malformed); no match self-loops with
/// reward 0.
RmStepResult rm_step(const RewardMachine& rm, StateId current,
                     const TruthAssignment& t);

/// Advances a coupled group: evaluates every member's guards and follows the
/// unique match. The result reports the member whose guard fired; `next` is
/// the target state (its group is the successor group).
RmStepResult rm_step_group(const RewardMachine& rm, int group,
                           const TruthAssignment& t);

enum class ViolationKind {
  Determinism,
  TerminalOutgoing,
  UndeclaredAtom,
  LabelMissing,
  LabelNotInjective,
  LabelDepth,
  Coupling,
  SameStateConsumption,
  DuplicateFeature,
  BadInitial,
};

struct Violation {
  ViolationKind kind;
  std::string detail;
};

/// Structural validation of a reward machine against its kind's invariants.
/// Determinism is checked over the single-event envelope: assignments with at
/// most one boolean feature true, crossed with all numeric categories.
std::vector<Violation> validate_rm(const RewardMachine& rm);

}  // namespace rmkit

#endif
