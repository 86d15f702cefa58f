#include "rmkit/learner.hpp"

#include <algorithm>
#include <stdexcept>

namespace rmkit {

std::string to_string(Algo a) {
  switch (a) {
    case Algo::QRM:
      return "qrm";
    case Algo::CRM:
      return "crm";
    case Algo::CoRM:
      return "corm";
  }
  return "?";
}

Algo parse_algo(const std::string& name) {
  if (name == "qrm") return Algo::QRM;
  if (name == "crm") return Algo::CRM;
  if (name == "corm") return Algo::CoRM;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

Learner::Learner(Algo algo, GridMap map, RewardMachine rm, Hyperparams hp,
                 uint64_t seed)
    : algo_(algo),
      map_(std::move(map)),
      rm_(std::move(rm)),
      hp_(hp),
      rng(seed) {
  if (algo_ == Algo::CoRM && rm_.kind != RmKind::Coupled)
    throw std::invalid_argument("CoRM requires a coupled reward machine");
  if (algo_ != Algo::CoRM && rm_.kind == RmKind::Coupled)
    throw std::invalid_argument("coupled machines are CoRM-only");
  auto violations = validate_rm(rm_);
  if (!violations.empty())
    throw std::invalid_argument("invalid reward machine: " +
                                violations.front().detail);
  map_.check();

  catalog_ = feature_catalog(map_);
  universe_ = catalog_.subtask_features;
  universe_.insert(universe_.end(), catalog_.boolean_objectives.begin(),
                   catalog_.boolean_objectives.end());

  member_subtask_.assign(rm_.state_count(), -1);
  if (algo_ == Algo::CoRM) {
    for (const auto& [u, label] : rm_.labels) {
      if (label.objective == StateLabel::Objective::None) continue;
      int idx = subtask_index(label.objective_name);
      if (idx < 0)
        throw std::invalid_argument("RM objective '" + label.objective_name +
                                    "' is not an environment subtask");
      member_subtask_[u] = idx;
    }
  }

  q.init_value = hp_.q_init;
  reward.gamma = hp_.gamma;
  reward.window = hp_.lambda;
  reward.r_min = hp_.r_min;
  reward.r_max = hp_.r_max;
}

int Learner::subtask_index(const std::string& name) const {
  for (size_t i = 0; i < universe_.size(); ++i)
    if (universe_[i] == name) return (int)i;
  return -1;
}

uint64_t Learner::product_key(const GridState& s, int rm_pos) const {
  return encode_state(map_, s) | ((uint64_t)rm_pos << 40);
}

uint64_t Learner::subtask_key(const GridState& s, int subtask) const {
  return encode_state(map_, s) | ((uint64_t)subtask << 40);
}

int Learner::epsilon_greedy(uint64_t key, std::mt19937_64& gen,
                            double epsilon) const {
  if (epsilon > 0.0) {
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(gen) < epsilon) {
      std::uniform_int_distribution<int> pick(0, kNumActions - 1);
      return pick(gen);
    }
  }
  return q.greedy_action(key, gen);
}

std::vector<int> Learner::reachable_states(const GridState& s) const {
  std::vector<int> out;
  auto consumed = consumed_features(map_, s);
  for (StateId u = 0; u < rm_.state_count(); ++u) {
    bool ok = true;
    if (!consumed.empty() && !rm_.is_terminal(u)) {
      for (const auto* tr : rm_.outgoing(u)) {
        for (const auto& atom : tr->guard.positive_boolean_atoms())
          if (consumed.count(atom)) {
            ok = false;
            break;
          }
        if (!ok) break;
      }
    }
    if (ok) out.push_back(u);
  }
  return out;
}

bool Learner::member_unused(int member) const {
  for (size_t i = 0; i < rm_.transitions.size(); ++i) {
    const auto& tr = rm_.transitions[i];
    if (tr.source == member && tr.target != member &&
        !used_transitions.count((int)i))
      return true;
  }
  return false;
}

HighLevelChoice Learner::high_level_select(int group, std::mt19937_64& gen,
                                           double xi) const {
  const auto& members = rm_.groups[group];
  HighLevelChoice choice;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  bool explore = xi > 0.0 && coin(gen) < xi;

  std::vector<int> pool;
  if (explore) {
    choice.exploit = false;
    for (int m : members)
      if (member_unused(m)) pool.push_back(m);
    if (pool.empty()) pool.assign(members.begin(), members.end());
  } else {
    choice.exploit = true;
    long best = -1;
    for (int m : members) {
      auto steps = eta.get(m);
      if (!steps) continue;
      if (best < 0 || *steps < best) {
        best = *steps;
        pool.clear();
      }
      if (*steps == best) pool.push_back(m);
    }
    if (pool.empty()) pool.assign(members.begin(), members.end());
  }
  if (pool.size() == 1) {
    choice.member = pool[0];
  } else {
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    choice.member = pool[pick(gen)];
  }
  return choice;
}

EpisodeRecord Learner::run_episode(long max_steps) {
  EpisodeRecord rec;
  long cap = std::min(hp_.episode_cap, max_steps);
  if (cap <= 0) return rec;

  GridState s = env_reset(map_);

  // QRM/CRM position.
  StateId u = rm_.initial;
  // CoRM position.
  int group = rm_.initial_group();
  HighLevelChoice choice;
  TransitionBuffer buffer;
  std::vector<std::pair<int, long>> visited;  // (member state, entry step)
  long group_entered = 0;
  if (algo_ == Algo::CoRM) choice = high_level_select(group, rng, hp_.xi);

  long step = 0;
  bool goal = false;
  while (step < cap) {
    uint64_t act_key = algo_ == Algo::CoRM
                           ? subtask_key(s, member_subtask_[choice.member])
                           : product_key(s, u);
    int a = epsilon_greedy(act_key, rng, hp_.epsilon);
    StepOutcome out = env_step(s, (Action)a, map_);
    ++step;
    ++total_steps_;
    long updates_before = total_updates_;
    auto note_peak = [&] {
      peak_step_updates_ =
          std::max(peak_step_updates_, total_updates_ - updates_before);
    };
    bool env_failed = out.kind == TerminationKind::EnvFailure;

    if (algo_ == Algo::CoRM) {
      RmStepResult res = rm_step_group(rm_, group, out.assignment);
      rec.total_reward += res.reward;
      cumulative_reward_ += res.reward;

      std::set<std::string> fired_features;
      for (const auto& [name, v] : out.assignment.booleans)
        if (v) fired_features.insert(name);
      auto consumed = consumed_features(map_, out.next);

      // Lifted updates for the group's unfinished subtasks.
      for (int m : rm_.groups[group]) {
        if (res.fired && m == res.fired_member) continue;
        int tau = member_subtask_[m];
        double target =
            env_failed ? 0.0 : hp_.gamma * q.max_value(subtask_key(out.next, tau));
        q.update(subtask_key(s, tau), a, target, hp_.alpha);
        ++total_updates_;
      }
      // Counterfactual lifted updates for out-of-group subtasks.
      if (hp_.corm_counterfactual) {
        std::set<int> in_group;
        for (int m : rm_.groups[group]) in_group.insert(member_subtask_[m]);
        for (int tau = 0; tau < (int)universe_.size(); ++tau) {
          if (in_group.count(tau) || fired_features.count(universe_[tau]) ||
              consumed.count(universe_[tau]))
            continue;
          double target = env_failed
                              ? 0.0
                              : hp_.gamma * q.max_value(subtask_key(out.next, tau));
          q.update(subtask_key(s, tau), a, target, hp_.alpha);
          ++total_updates_;
        }
      }

      if (res.fired) {
        used_transitions.insert(*res.fired);
        int tau = member_subtask_[res.fired_member];
        buffer.entries.push_back({subtask_key(s, tau), a, res.fired_member, tau,
                                  step, step - group_entered, choice.exploit});
        visited.push_back({res.fired_member, group_entered});
        if (rm_.is_terminal(res.next)) {
          rec.success = res.reward > 0;
          goal = rec.success;
          if (goal) visited.push_back({res.next, step});
          s = out.next;
          note_peak();
          break;
        }
        group = rm_.group_of[res.next];
        group_entered = step;
        choice = high_level_select(group, rng, hp_.xi);
      }
    } else {
      RmStepResult actual = rm_step(rm_, u, out.assignment);
      rec.total_reward += actual.reward;
      cumulative_reward_ += actual.reward;

      std::vector<int> targets =
          algo_ == Algo::CRM ? reachable_states(s) : std::vector<int>{u};
      for (int v : targets) {
        if (rm_.is_terminal(v)) {
          q.update(product_key(s, v), a, 0.0, hp_.alpha);
          ++total_updates_;
          continue;
        }
        RmStepResult r = rm_step(rm_, v, out.assignment);
        double boot = (env_failed || rm_.is_terminal(r.next))
                          ? 0.0
                          : hp_.gamma * q.max_value(product_key(out.next, r.next));
        q.update(product_key(s, v), a, r.reward + boot, hp_.alpha);
        ++total_updates_;
      }

      if (actual.fired && rm_.is_terminal(actual.next)) {
        rec.success = actual.reward > 0;
        s = out.next;
        note_peak();
        break;
      }
      u = actual.next;
    }

    note_peak();
    s = out.next;
    if (env_failed) {
      rec.env_failed = true;
      break;
    }
  }
  rec.length = step;
  ++episodes_;

  if (algo_ == Algo::CoRM) {
    if (goal) {
      if (reward.best_length == kUnknownLength || step < reward.best_length)
        reward.best_length = step;
      for (const auto& [state, entered] : visited)
        eta.observe(state, step - entered);
      for (const auto& e : buffer.entries) {
        if (!e.exploit) continue;
        q.update(e.product_key, e.action,
                 final_reward(step, e.subtask_steps, reward), hp_.alpha);
        ++total_updates_;
      }
    }
    buffer.clear();
  }
  return rec;
}

EpisodeRecord Learner::greedy_episode(std::mt19937_64& probe_rng) const {
  EpisodeRecord rec;
  GridState s = env_reset(map_);
  StateId u = rm_.initial;
  int group = rm_.initial_group();
  HighLevelChoice choice;
  if (algo_ == Algo::CoRM) choice = high_level_select(group, probe_rng, 0.0);

  long step = 0;
  while (step < hp_.episode_cap) {
    uint64_t key = algo_ == Algo::CoRM
                       ? subtask_key(s, member_subtask_[choice.member])
                       : product_key(s, u);
    int a = q.greedy_action(key, probe_rng);
    StepOutcome out = env_step(s, (Action)a, map_);
    ++step;

    if (algo_ == Algo::CoRM) {
      RmStepResult res = rm_step_group(rm_, group, out.assignment);
      rec.total_reward += res.reward;
      if (res.fired) {
        if (rm_.is_terminal(res.next)) {
          rec.success = res.reward > 0;
          break;
        }
        group = rm_.group_of[res.next];
        choice = high_level_select(group, probe_rng, 0.0);
      }
    } else {
      RmStepResult res = rm_step(rm_, u, out.assignment);
      rec.total_reward += res.reward;
      if (res.fired && rm_.is_terminal(res.next)) {
        rec.success = res.reward > 0;
        break;
      }
      u = res.next;
    }

    s = out.next;
    if (out.kind == TerminationKind::EnvFailure) {
      rec.env_failed = true;
      break;
    }
  }
  rec.length = step;
  return rec;
}

void Learner::restore_counters(long steps, long updates,
                               long peak_step_updates, long episodes,
                               double cumulative_reward) {
  total_steps_ = steps;
  total_updates_ = updates;
  peak_step_updates_ = peak_step_updates;
  episodes_ = episodes;
  cumulative_reward_ = cumulative_reward;
}

}  // namespace rmkit
