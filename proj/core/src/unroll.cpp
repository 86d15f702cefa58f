#include "rmkit/unroll.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace rmkit {

namespace {

struct Event {
  enum class Kind { Subtask, Feature };
  Kind kind;
  std::string name;      // subtask feature or boolean feature
  std::string variable;  // owning numeric variable (subtask events)
};

// Frontier element of the unrolling search: originating numeric-RM state,
// current counter values, and the completion history so far.
struct UnrollContext {
  StateId numeric_state;
  std::map<std::string, int> valuation;
  std::vector<std::string> history;  // completion order
  int depth = 0;

  std::set<std::string> completed() const {
    return {history.begin(), history.end()};
  }
};

struct Expansion {
  Event event;
  UnrollContext successor;
  double reward;
};

class Unroller {
 public:
  Unroller(const RewardMachine& num_rm, const SubtaskBindings& bindings,
           bool merge_by_label)
      : num_rm_(num_rm), bindings_(bindings), merge_(merge_by_label) {
    check_inputs();
  }

  RewardMachine run() {
    RewardMachine out;
    out.kind = merge_ ? RmKind::Agenda : RmKind::Boolean;
    for (const auto& [var, subtasks] : bindings_)
      for (const auto& s : subtasks) out.boolean_features.push_back(s);
    for (const auto& f : num_rm_.boolean_features)
      out.boolean_features.push_back(f);
    std::sort(out.boolean_features.begin(), out.boolean_features.end());

    UnrollContext root{num_rm_.initial, full_valuation(), {}, 0};
    std::deque<UnrollContext> frontier{root};
    out.initial = intern(out, root);

    std::set<std::string> expanded;
    std::set<std::tuple<StateId, std::string, StateId>> emitted;
    while (!frontier.empty()) {
      UnrollContext ctx = frontier.front();
      frontier.pop_front();
      StateId src = intern(out, ctx);
      if (!expanded.insert(state_key(ctx)).second) continue;
      if (num_rm_.is_terminal(ctx.numeric_state)) continue;
      check_spontaneous(ctx);
      for (const auto& exp : expand(ctx)) {
        bool fresh = known_keys_.find(state_key(exp.successor)) ==
                     known_keys_.end();
        StateId dst = intern(out, exp.successor);
        if (emitted.insert({src, exp.event.name, dst}).second)
          out.transitions.push_back(
              {src, Guard::boolean(exp.event.name), exp.reward, dst});
        if (fresh) frontier.push_back(exp.successor);
      }
    }

    add_self_loops(out);
    return out;
  }

 private:
  const RewardMachine& num_rm_;
  const SubtaskBindings& bindings_;
  bool merge_;
  std::map<std::string, StateId> known_keys_;
  int next_name_ = 0;

  void check_inputs() {
    for (const auto& var : num_rm_.numeric_variables) {
      auto it = bindings_.find(var.name);
      if (it == bindings_.end())
        throw TranslationError("no subtask bindings for variable " + var.name);
      if ((int)it->second.size() != var.upper_bound - var.lower_bound)
        throw TranslationError(
            "variable " + var.name + " needs " +
            std::to_string(var.upper_bound - var.lower_bound) +
            " subtasks, got " + std::to_string(it->second.size()));
    }
    for (const auto& tr : num_rm_.transitions)
      if (tr.guard.consuming_numeric_atoms().size() > 1)
        throw TranslationError(
            "transition guard consumes two numeric events: " +
            tr.guard.to_string());
  }

  std::map<std::string, int> full_valuation() const {
    std::map<std::string, int> val;
    for (const auto& var : num_rm_.numeric_variables)
      val[var.name] = var.upper_bound;
    return val;
  }

  std::vector<std::string> all_subtasks() const {
    std::vector<std::string> out;
    for (const auto& [var, subtasks] : bindings_)
      out.insert(out.end(), subtasks.begin(), subtasks.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<std::string> remaining_subtasks(const UnrollContext& ctx) const {
    auto done = ctx.completed();
    std::vector<std::string> out;
    for (const auto& s : all_subtasks())
      if (!done.count(s)) out.push_back(s);
    return out;
  }

  std::vector<Event> possible_events(const UnrollContext& ctx) const {
    std::vector<Event> events;
    auto done = ctx.completed();
    for (const auto& [var, subtasks] : bindings_)
      for (const auto& s : subtasks)
        if (!done.count(s)) events.push_back({Event::Kind::Subtask, s, var});
    for (const auto& f : num_rm_.boolean_features)
      events.push_back({Event::Kind::Feature, f, ""});
    std::sort(events.begin(), events.end(),
              [](const Event& a, const Event& b) { return a.name < b.name; });
    return events;
  }

  TruthAssignment assignment_for(const UnrollContext& ctx,
                                 const Event* event) const {
    TruthAssignment t;
    for (const auto& f : num_rm_.boolean_features)
      t.booleans[f] =
          event && event->kind == Event::Kind::Feature && event->name == f;
    for (const auto& var : num_rm_.numeric_variables) {
      int prev = ctx.valuation.at(var.name);
      int curr = prev;
      if (event && event->kind == Event::Kind::Subtask &&
          event->variable == var.name)
        curr = prev - 1;
      t.numerics[var.name] = eval_numeric_feature(var, prev, curr);
    }
    return t;
  }

  void check_spontaneous(const UnrollContext& ctx) const {
    auto res = rm_step(num_rm_, ctx.numeric_state, assignment_for(ctx, nullptr));
    if (res.fired && res.next != ctx.numeric_state)
      throw TranslationError("state " +
                             num_rm_.state_names[ctx.numeric_state] +
                             " transitions on an empty event");
  }

  std::vector<Expansion> expand(const UnrollContext& ctx) const {
    std::vector<Expansion> out;
    for (const auto& event : possible_events(ctx)) {
      auto t = assignment_for(ctx, &event);
      auto res = rm_step(num_rm_, ctx.numeric_state, t);
      if (!res.fired) continue;
      const auto& tr = num_rm_.transitions[*res.fired];
      bool self_loop = tr.target == tr.source;
      if (event.kind == Event::Kind::Subtask) {
        if (self_loop) continue;  // unconsumed decrement; environment-impossible
        if (!tr.guard.consuming_numeric_atoms().count(event.variable))
          throw TranslationError("numeric event on " + event.name +
                                 " consumed without a dec/done test: " +
                                 tr.guard.to_string());
        UnrollContext next = ctx;
        next.numeric_state = tr.target;
        next.valuation[event.variable] -= 1;
        next.history.push_back(event.name);
        next.depth += 1;
        out.push_back({event, std::move(next), tr.reward});
      } else {
        if (self_loop) continue;  // absorbed into the generated self-loop
        UnrollContext next = ctx;
        next.numeric_state = tr.target;
        next.depth += 1;
        out.push_back({event, std::move(next), tr.reward});
      }
    }
    return out;
  }

  StateLabel label_for(const UnrollContext& ctx) const {
    StateLabel label;
    label.depth = ctx.depth;
    label.agenda = remaining_subtasks(ctx);
    if (num_rm_.is_terminal(ctx.numeric_state)) {
      label.objective = StateLabel::Objective::None;
      return label;
    }
    std::set<std::string> events;
    bool all_subtasks_out = true;
    for (const auto& exp : expand(ctx)) {
      events.insert(exp.event.name);
      if (exp.event.kind != Event::Kind::Subtask) all_subtasks_out = false;
    }
    std::set<std::string> agenda_set(label.agenda.begin(), label.agenda.end());
    if (!events.empty() && all_subtasks_out && events == agenda_set) {
      label.objective = StateLabel::Objective::Agenda;
    } else if (events.size() == 1) {
      label.objective_name = *events.begin();
      label.objective = agenda_set.count(label.objective_name)
                            ? StateLabel::Objective::Subtask
                            : StateLabel::Objective::Feature;
    } else if (merge_) {
      throw TranslationError("state with mixed objectives cannot be labelled");
    } else {
      // Boolean mode keeps going; the label is only advisory there.
      label.objective = StateLabel::Objective::Agenda;
    }
    return label;
  }

  std::string state_key(const UnrollContext& ctx) const {
    if (merge_) return label_for(ctx).to_string();
    std::string key = std::to_string(ctx.numeric_state);
    for (const auto& [var, v] : ctx.valuation)
      key += "|" + var + "=" + std::to_string(v);
    for (const auto& h : ctx.history) key += ";" + h;
    return key;
  }

  StateId intern(RewardMachine& out, const UnrollContext& ctx) {
    auto key = state_key(ctx);
    auto it = known_keys_.find(key);
    if (it != known_keys_.end()) return it->second;
    StateLabel label = label_for(ctx);
    std::string name =
        merge_ ? label.to_string() : "u" + std::to_string(next_name_++);
    StateId id =
        out.add_state(std::move(name), num_rm_.is_terminal(ctx.numeric_state));
    out.labels[id] = label;
    known_keys_[key] = id;
    return id;
  }

  void add_self_loops(RewardMachine& out) const {
    std::vector<RewardMachine::Transition> loops;
    for (StateId u = 0; u < out.state_count(); ++u) {
      if (out.is_terminal(u)) continue;
      std::set<std::string> atoms;
      for (const auto& tr : out.transitions)
        if (tr.source == u)
          for (const auto& atom : tr.guard.positive_boolean_atoms())
            atoms.insert(atom);
      if (atoms.empty()) continue;
      std::vector<Guard> negations;
      for (const auto& atom : atoms)
        negations.push_back(Guard::boolean(atom, true));
      loops.push_back({u, Guard::conj(std::move(negations)), 0.0, u});
    }
    out.transitions.insert(out.transitions.end(), loops.begin(), loops.end());
  }
};

}  // namespace

RewardMachine unroll_to_boolean(const RewardMachine& num_rm,
                                const SubtaskBindings& bindings) {
  return Unroller(num_rm, bindings, false).run();
}

RewardMachine unroll_to_agenda(const RewardMachine& num_rm,
                               const SubtaskBindings& bindings) {
  return Unroller(num_rm, bindings, true).run();
}

RewardMachine split_to_coupled(const RewardMachine& agenda_rm) {
  RewardMachine out;
  out.kind = RmKind::Coupled;
  out.boolean_features = agenda_rm.boolean_features;
  out.numeric_variables = agenda_rm.numeric_variables;

  // Map each agenda state to its member states in the coupled machine.
  std::vector<std::vector<StateId>> members_of(agenda_rm.state_count());
  out.group_of.clear();
  for (StateId u = 0; u < agenda_rm.state_count(); ++u) {
    auto it = agenda_rm.labels.find(u);
    if (it == agenda_rm.labels.end())
      throw TranslationError("agenda state " + agenda_rm.state_names[u] +
                             " has no label");
    const StateLabel& label = it->second;
    int group = (int)out.groups.size();
    std::vector<StateId> members;
    if (label.objective == StateLabel::Objective::Agenda &&
        !label.agenda.empty()) {
      for (const auto& subtask : label.agenda) {
        StateLabel split = label;
        split.objective = StateLabel::Objective::Subtask;
        split.objective_name = subtask;
        StateId id = out.add_state(split.to_string(), agenda_rm.is_terminal(u));
        out.labels[id] = split;
        out.group_of.push_back(group);
        members.push_back(id);
      }
    } else {
      StateId id = out.add_state(agenda_rm.state_names[u],
                                 agenda_rm.is_terminal(u));
      out.labels[id] = label;
      out.group_of.push_back(group);
      members.push_back(id);
    }
    out.groups.push_back(members);
    members_of[u] = members;
  }
  out.initial = members_of[agenda_rm.initial].front();

  for (const auto& tr : agenda_rm.transitions) {
    const auto& sources = members_of[tr.source];
    StateId target = members_of[tr.target].front();
    if (sources.size() == 1) {
      if (tr.source == tr.target)
        out.transitions.push_back(
            {sources.front(), tr.guard, tr.reward, sources.front()});
      else
        out.transitions.push_back({sources.front(), tr.guard, tr.reward, target});
      continue;
    }
    if (tr.source == tr.target) continue;  // replaced by per-member loops
    auto positive = tr.guard.positive_boolean_atoms();
    if (positive.size() != 1)
      throw TranslationError("cannot split transition with guard " +
                             tr.guard.to_string());
    const std::string& atom = *positive.begin();
    bool matched = false;
    for (StateId m : sources) {
      if (out.labels.at(m).objective_name != atom) continue;
      out.transitions.push_back({m, tr.guard, tr.reward, target});
      matched = true;
    }
    if (!matched)
      throw TranslationError("no coupled member matches objective " + atom);
  }

  // Per-member self-loops: stay while the member's own objective is pending.
  for (StateId m = 0; m < out.state_count(); ++m) {
    if (out.is_terminal(m)) continue;
    if (out.groups[out.group_of[m]].size() < 2) continue;
    out.transitions.push_back(
        {m, Guard::boolean(out.labels.at(m).objective_name, true), 0.0, m});
  }

  return out;
}

}  // namespace rmkit
