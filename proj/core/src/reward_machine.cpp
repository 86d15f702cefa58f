#include "rmkit/reward_machine.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace rmkit {

std::string to_string(RmKind k) {
  switch (k) {
    case RmKind::Boolean:
      return "boolean";
    case RmKind::Numeric:
      return "numeric";
    case RmKind::Agenda:
      return "agenda";
    case RmKind::Coupled:
      return "coupled";
  }
  return "?";
}

std::string StateLabel::to_string() const {
  std::string agenda_str = "{";
  for (size_t i = 0; i < agenda.size(); ++i) {
    if (i) agenda_str += ",";
    agenda_str += agenda[i];
  }
  agenda_str += "}";
  std::string obj;
  switch (objective) {
    case Objective::None:
      break;
    case Objective::Agenda:
      obj = agenda_str;
      break;
    case Objective::Subtask:
    case Objective::Feature:
      obj = objective_name;
      break;
  }
  return std::to_string(depth) + agenda_str + obj;
}

StateId RewardMachine::add_state(std::string name, bool is_terminal_state) {
  state_names.push_back(std::move(name));
  terminal.push_back(is_terminal_state);
  return (StateId)state_names.size() - 1;
}

std::optional<StateId> RewardMachine::find_state(
    const std::string& name) const {
  for (size_t i = 0; i < state_names.size(); ++i)
    if (state_names[i] == name) return (StateId)i;
  return std::nullopt;
}

std::vector<const RewardMachine::Transition*> RewardMachine::outgoing(
    StateId u) const {
  std::vector<const Transition*> out;
  for (const auto& t : transitions)
    if (t.source == u) out.push_back(&t);
  return out;
}

const NumericVariable* RewardMachine::find_variable(
    const std::string& name) const {
  for (const auto& v : numeric_variables)
    if (v.name == name) return &v;
  return nullptr;
}

bool RewardMachine::has_boolean_feature(const std::string& name) const {
  return std::find(boolean_features.begin(), boolean_features.end(), name) !=
         boolean_features.end();
}

void RewardMachine::make_singleton_groups() {
  groups.clear();
  group_of.assign(state_count(), -1);
  for (StateId u = 0; u < state_count(); ++u) {
    group_of[u] = (int)groups.size();
    groups.push_back({u});
  }
}

RmStepResult rm_step(const RewardMachine& rm, StateId current,
                     const TruthAssignment& t) {
  if (rm.is_terminal(current))
    throw std::invalid_argument("rm_step from terminal state " +
                                rm.state_names[current]);
  RmStepResult result{current, 0.0, std::nullopt, -1};
  for (size_t i = 0; i < rm.transitions.size(); ++i) {
    const auto& tr = rm.transitions[i];
    if (tr.source != current) continue;
    if (!tr.guard.eval(t)) continue;
    if (result.fired)
      throw DeterminismViolationError(
          "two guards fire from state " + rm.state_names[current] + ": " +
          rm.transitions[*result.fired].guard.to_string() + " and " +
          tr.guard.to_string());
    result.fired = (int)i;
    result.next = tr.target;
    result.reward = tr.reward;
    result.fired_member = current;
  }
  return result;
}

RmStepResult rm_step_group(const RewardMachine& rm, int group,
                           const TruthAssignment& t) {
  if (rm.groups.empty()) throw std::invalid_argument("machine has no groups");
  const auto& members = rm.groups.at(group);
  // Progress transitions (leaving the group) must be unique across members;
  // members' own self-loops fire concurrently and are absorbed.
  RmStepResult result{members.front(), 0.0, std::nullopt, -1};
  for (size_t i = 0; i < rm.transitions.size(); ++i) {
    const auto& tr = rm.transitions[i];
    if (std::find(members.begin(), members.end(), tr.source) == members.end())
      continue;
    if (rm.group_of[tr.target] == group) continue;
    if (!tr.guard.eval(t)) continue;
    if (result.fired)
      throw DeterminismViolationError(
          "two group members fire concurrently from group " +
          std::to_string(group));
    result.fired = (int)i;
    result.next = tr.target;
    result.reward = tr.reward;
    result.fired_member = tr.source;
  }
  return result;
}

namespace {

// Enumerates the single-event assignment envelope: at most one boolean
// feature true per step, crossed with all numeric change categories.
std::vector<TruthAssignment> envelope_assignments(const RewardMachine& rm) {
  constexpr NumericFeatureValue kValues[] = {NumericFeatureValue::Decreased,
                                             NumericFeatureValue::AtBound,
                                             NumericFeatureValue::NoProgress};
  std::vector<std::map<std::string, NumericFeatureValue>> numeric_combos{{}};
  for (const auto& var : rm.numeric_variables) {
    std::vector<std::map<std::string, NumericFeatureValue>> next;
    for (const auto& combo : numeric_combos)
      for (auto v : kValues) {
        auto c = combo;
        c[var.name] = v;
        next.push_back(std::move(c));
      }
    numeric_combos = std::move(next);
  }
  std::vector<TruthAssignment> out;
  for (int event = -1; event < (int)rm.boolean_features.size(); ++event) {
    for (const auto& combo : numeric_combos) {
      TruthAssignment t;
      for (size_t i = 0; i < rm.boolean_features.size(); ++i)
        t.booleans[rm.boolean_features[i]] = (int)i == event;
      t.numerics = combo;
      out.push_back(std::move(t));
    }
  }
  return out;
}

// Shortest progress-transition distance from the initial state (or initial
// group, for coupled machines).
std::vector<int> bfs_depths(const RewardMachine& rm) {
  const int unreached = std::numeric_limits<int>::max();
  std::vector<int> depth(rm.state_count(), unreached);
  std::deque<StateId> queue;
  auto visit_group = [&](StateId seed, int d) {
    if (!rm.groups.empty()) {
      for (StateId m : rm.groups[rm.group_of[seed]])
        if (depth[m] == unreached) {
          depth[m] = d;
          queue.push_back(m);
        }
    } else if (depth[seed] == unreached) {
      depth[seed] = d;
      queue.push_back(seed);
    }
  };
  visit_group(rm.initial, 0);
  while (!queue.empty()) {
    StateId u = queue.front();
    queue.pop_front();
    for (const auto& tr : rm.transitions) {
      if (tr.source != u || tr.target == u) continue;
      if (!rm.groups.empty() &&
          rm.group_of[tr.target] == rm.group_of[tr.source])
        continue;
      visit_group(tr.target, depth[u] + 1);
    }
  }
  return depth;
}

}  // namespace

std::vector<Violation> validate_rm(const RewardMachine& rm) {
  std::vector<Violation> out;
  auto add = [&](ViolationKind k, std::string d) {
    out.push_back({k, std::move(d)});
  };

  if (rm.initial < 0 || rm.initial >= rm.state_count())
    add(ViolationKind::BadInitial, "initial state out of range");
  else if (rm.is_terminal(rm.initial))
    add(ViolationKind::BadInitial, "initial state is terminal");

  {
    std::set<std::string> seen;
    for (const auto& f : rm.boolean_features)
      if (!seen.insert(f).second)
        add(ViolationKind::DuplicateFeature, "duplicate boolean feature " + f);
    for (const auto& v : rm.numeric_variables) {
      if (!seen.insert(v.name).second)
        add(ViolationKind::DuplicateFeature,
            "duplicate feature name " + v.name);
      if (v.upper_bound < v.lower_bound)
        add(ViolationKind::DuplicateFeature,
            "empty domain for variable " + v.name);
    }
  }

  for (const auto& tr : rm.transitions) {
    if (rm.is_terminal(tr.source))
      add(ViolationKind::TerminalOutgoing,
          "terminal state " + rm.state_names[tr.source] +
              " has an outgoing transition");
    for (const auto& name : tr.guard.boolean_atoms())
      if (!rm.has_boolean_feature(name))
        add(ViolationKind::UndeclaredAtom, "undeclared boolean atom " + name);
    for (const auto& name : tr.guard.numeric_atoms())
      if (!rm.find_variable(name))
        add(ViolationKind::UndeclaredAtom, "undeclared numeric atom " + name);
  }

  // Determinism over the single-event envelope. Coupled groups additionally
  // require a unique progress transition across all members.
  if (rm.boolean_features.size() <= 12) {
    auto assignments = envelope_assignments(rm);
    for (StateId u = 0; u < rm.state_count(); ++u) {
      if (rm.is_terminal(u)) continue;
      auto outs = rm.outgoing(u);
      for (const auto& t : assignments) {
        int fired = 0;
        for (const auto* tr : outs) {
          try {
            if (tr->guard.eval(t)) ++fired;
          } catch (const std::out_of_range&) {
            // undeclared atoms already reported
          }
        }
        if (fired > 1) {
          add(ViolationKind::Determinism,
              "state " + rm.state_names[u] +
                  " fires multiple guards on one assignment");
          break;
        }
      }
    }
    if (rm.kind == RmKind::Coupled && !rm.groups.empty()) {
      for (size_t g = 0; g < rm.groups.size(); ++g) {
        for (const auto& t : assignments) {
          int fired = 0;
          for (const auto& tr : rm.transitions) {
            if (std::find(rm.groups[g].begin(), rm.groups[g].end(),
                          tr.source) == rm.groups[g].end())
              continue;
            if (rm.group_of[tr.target] == (int)g) continue;
            try {
              if (tr.guard.eval(t)) ++fired;
            } catch (const std::out_of_range&) {
            }
          }
          if (fired > 1) {
            add(ViolationKind::Determinism,
                "coupled group " + std::to_string(g) +
                    " fires multiple progress transitions on one assignment");
            break;
          }
        }
      }
    }
  }

  // Assumption: numeric events must leave the state they are consumed in.
  if (rm.kind == RmKind::Numeric) {
    for (const auto& tr : rm.transitions)
      if (tr.source == tr.target && !tr.guard.consuming_numeric_atoms().empty())
        add(ViolationKind::SameStateConsumption,
            "state " + rm.state_names[tr.source] +
                " consumes a numeric event on a self-loop");
  }

  if (rm.kind == RmKind::Agenda || rm.kind == RmKind::Coupled) {
    std::map<StateLabel, StateId> seen;
    for (StateId u = 0; u < rm.state_count(); ++u) {
      auto it = rm.labels.find(u);
      if (it == rm.labels.end()) {
        add(ViolationKind::LabelMissing,
            "state " + rm.state_names[u] + " has no label");
        continue;
      }
      auto [pos, inserted] = seen.emplace(it->second, u);
      if (!inserted)
        add(ViolationKind::LabelNotInjective,
            "states " + rm.state_names[pos->second] + " and " +
                rm.state_names[u] + " share label " + it->second.to_string());
    }
    if (out.empty()) {
      auto depths = bfs_depths(rm);
      for (const auto& [u, label] : rm.labels)
        if (depths[u] != std::numeric_limits<int>::max() &&
            depths[u] != label.depth)
          add(ViolationKind::LabelDepth,
              "state " + rm.state_names[u] + " labelled depth " +
                  std::to_string(label.depth) + " but BFS distance is " +
                  std::to_string(depths[u]));
    }
  }

  if (rm.kind == RmKind::Coupled) {
    if (rm.groups.empty() || rm.group_of.size() != (size_t)rm.state_count()) {
      add(ViolationKind::Coupling, "missing coupled-group partition");
    } else {
      for (size_t g = 0; g < rm.groups.size(); ++g) {
        const auto& members = rm.groups[g];
        if (members.empty()) {
          add(ViolationKind::Coupling, "empty coupled group");
          continue;
        }
        for (StateId m : members)
          if (rm.group_of[m] != (int)g)
            add(ViolationKind::Coupling, "inconsistent group index for state " +
                                             rm.state_names[m]);
        auto first = rm.labels.find(members.front());
        if (first == rm.labels.end()) continue;
        for (StateId m : members) {
          auto it = rm.labels.find(m);
          if (it == rm.labels.end()) continue;
          if (it->second.depth != first->second.depth ||
              it->second.agenda != first->second.agenda)
            add(ViolationKind::Coupling,
                "group members " + rm.state_names[members.front()] + " and " +
                    rm.state_names[m] + " differ in depth or agenda");
        }
      }
    }
  }

  return out;
}

}  // namespace rmkit
