#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "rmkit/checkpoint.hpp"
#include "rmkit/grid.hpp"
#include "rmkit/learner.hpp"
#include "rmkit/oracle.hpp"
#include "rmkit/qtable.hpp"
#include "rmkit/rm_text.hpp"
#include "rmkit/unroll.hpp"

using namespace rmkit;

namespace {

Learner make_fig_learner(Algo algo, RmKind target, uint64_t seed = 1,
                         Hyperparams hp = {}) {
  GridMap map = delivery_example_map();
  RewardMachine numeric = delivery_numeric_rm(2);
  SubtaskBindings bindings = feature_catalog(map).bindings;
  RewardMachine rm;
  switch (target) {
    case RmKind::Numeric:
      rm = numeric;
      break;
    case RmKind::Boolean:
      rm = unroll_to_boolean(numeric, bindings);
      break;
    case RmKind::Agenda:
      rm = unroll_to_agenda(numeric, bindings);
      break;
    case RmKind::Coupled:
      rm = split_to_coupled(unroll_to_agenda(numeric, bindings));
      break;
  }
  return Learner(algo, map, rm, hp, seed);
}

}  // namespace

TEST_CASE("q-table updates follow the standard rule") {
  QTable q;
  q.init_value = 1.0;
  // alpha 0.5, target 0.9: 1 + 0.5 * (0.9 - 1) = 0.95.
  q.update(7, 2, 0.9, 0.5);
  CHECK(q.value(7, 2) == doctest::Approx(0.95));
  CHECK(q.value(7, 0) == doctest::Approx(1.0));  // untouched slots keep init
  CHECK(q.value(99, 3) == doctest::Approx(1.0));  // absent rows read as init
  q.update(7, 2, 0.9, 1.0);
  CHECK(q.value(7, 2) == doctest::Approx(0.9));
  CHECK(q.max_value(7) == doctest::Approx(1.0));
}

TEST_CASE("greedy action breaks ties uniformly") {
  QTable q;
  q.row(1) = {0.5, 0.7, 0.7, 0.1};
  std::mt19937_64 rng(9);
  std::set<int> seen;
  for (int i = 0; i < 200; ++i) seen.insert(q.greedy_action(1, rng));
  CHECK(seen == std::set<int>{1, 2});
}

TEST_CASE("eta table keeps the minimum observation") {
  EtaTable eta;
  CHECK_FALSE(eta.get(3).has_value());
  eta.observe(3, 12);
  eta.observe(3, 9);
  eta.observe(3, 30);
  CHECK(eta.get(3) == 9);
}

TEST_CASE("final reward matches the closed form") {
  RewardParams p;
  p.gamma = 0.9;
  p.r_min = 0.0;
  p.r_max = 0.0;

  SUBCASE("disabled window always pays 1") {
    p.window = -1;
    p.best_length = 10;
    CHECK(final_reward(500, 3, p) == doctest::Approx(1.0));
  }
  SUBCASE("matching the best length pays 1") {
    p.window = 80;
    p.best_length = 10;
    CHECK(final_reward(10, 3, p) == doctest::Approx(1.0));
    CHECK(final_reward(9, 3, p) == doctest::Approx(1.0));
  }
  SUBCASE("unknown best length pays 1") {
    p.window = 80;
    p.best_length = kUnknownLength;
    CHECK(final_reward(50, 3, p) == doctest::Approx(1.0));
  }
  SUBCASE("inside the window the reward decays geometrically") {
    p.window = 80;
    p.best_length = 10;
    CHECK(final_reward(13, 3, p) == doctest::Approx(std::pow(0.9, 4)));
    CHECK(final_reward(11, 3, p) == doctest::Approx(std::pow(0.9, 2)));
  }
  SUBCASE("past the window the reward is clamped at the floor") {
    p.window = 80;
    p.best_length = 10;
    double floor = std::pow(0.9, 81);
    CHECK(final_reward(110, 3, p) == doctest::Approx(floor));
    CHECK(final_reward(100000, 3, p) == doctest::Approx(floor));
  }
  SUBCASE("nonzero reward range adds the subtask tail") {
    p.window = 80;
    p.best_length = 10;
    p.r_min = 0.0;
    p.r_max = 1.0;
    double tail = std::pow(0.9, 1 - 4) / (1 - 0.9);
    CHECK(final_reward(13, 4, p) == doctest::Approx(std::pow(0.9, 4) + tail));
  }
  SUBCASE("monotone non-increasing in the episode length") {
    p.window = 12;
    p.best_length = 6;
    double prev = 2.0;
    for (long K = 6; K <= 40; ++K) {
      double r = final_reward(K, 2, p);
      CHECK(r <= prev + 1e-12);
      prev = r;
    }
  }
  SUBCASE("invalid windows are rejected") {
    p.window = -2;
    CHECK_THROWS(final_reward(10, 3, p));
  }
}

TEST_CASE("learner constructor enforces algorithm/machine pairing") {
  CHECK_THROWS(make_fig_learner(Algo::CoRM, RmKind::Boolean));
  CHECK_THROWS(make_fig_learner(Algo::CRM, RmKind::Coupled));
  CHECK_NOTHROW(make_fig_learner(Algo::CoRM, RmKind::Coupled));
  CHECK_NOTHROW(make_fig_learner(Algo::QRM, RmKind::Numeric));
}

TEST_CASE("the subtask universe lists subtasks then boolean objectives") {
  Learner learner = make_fig_learner(Algo::CoRM, RmKind::Coupled);
  CHECK(learner.subtask_universe() ==
        std::vector<std::string>{"b1", "b2", "s"});
  CHECK(learner.subtask_index("b2") == 1);
  CHECK(learner.subtask_index("s") == 2);
}

TEST_CASE("CRM reachability keeps all states until an event is consumed") {
  Learner learner = make_fig_learner(Algo::CRM, RmKind::Boolean);
  GridState fresh = env_reset(learner.map());
  CHECK(learner.reachable_states(fresh).size() ==
        (size_t)learner.machine().state_count());

  // After collecting box 1, states still waiting on b1 drop out.
  GridState after = fresh;
  after.remaining = 0b10u;
  after.carried_box = 0;
  auto reachable = learner.reachable_states(after);
  CHECK(reachable.size() == 7);
  for (const char* name : {"u0", "u4"}) {
    int id = *learner.machine().find_state(name);
    CHECK(std::find(reachable.begin(), reachable.end(), id) ==
          reachable.end());
  }
  // Terminal states never drop out.
  for (StateId u = 0; u < learner.machine().state_count(); ++u)
    if (learner.machine().is_terminal(u))
      CHECK(std::find(reachable.begin(), reachable.end(), u) !=
            reachable.end());
}

TEST_CASE("CRM performs one update per reachable state per step") {
  Learner learner = make_fig_learner(Algo::CRM, RmKind::Boolean);
  learner.run_episode(1);
  CHECK(learner.total_steps() == 1);
  CHECK(learner.total_updates() == 9);
  CHECK(learner.peak_step_updates() == 9);
}

TEST_CASE("CoRM per-step updates never exceed the subtask universe") {
  Learner learner = make_fig_learner(Algo::CoRM, RmKind::Coupled);
  for (int e = 0; e < 30; ++e) learner.run_episode(200);
  CHECK(learner.peak_step_updates() <=
        (long)learner.subtask_universe().size());
  CHECK(learner.peak_step_updates() >= 1);
}

TEST_CASE("high-level selection prefers the smallest eta") {
  Learner learner = make_fig_learner(Algo::CoRM, RmKind::Coupled);
  int g0 = learner.machine().initial_group();
  auto members = learner.machine().groups[g0];
  REQUIRE(members.size() == 2);
  std::mt19937_64 gen(5);

  SUBCASE("all unvisited: uniform exploit draw") {
    std::set<int> seen;
    for (int i = 0; i < 200; ++i) {
      auto choice = learner.high_level_select(g0, gen, 0.0);
      CHECK(choice.exploit);
      seen.insert(choice.member);
    }
    CHECK(seen == std::set<int>(members.begin(), members.end()));
  }
  SUBCASE("a visited member beats unvisited ones") {
    learner.eta.observe(members[1], 40);
    for (int i = 0; i < 50; ++i) {
      auto choice = learner.high_level_select(g0, gen, 0.0);
      CHECK(choice.member == members[1]);
      CHECK(choice.exploit);
    }
  }
  SUBCASE("smaller eta wins") {
    learner.eta.observe(members[0], 12);
    learner.eta.observe(members[1], 10);
    for (int i = 0; i < 50; ++i)
      CHECK(learner.high_level_select(g0, gen, 0.0).member == members[1]);
  }
  SUBCASE("xi = 1 explores both members") {
    learner.eta.observe(members[0], 12);
    learner.eta.observe(members[1], 10);
    std::set<int> seen;
    int exploits = 0;
    for (int i = 0; i < 300; ++i) {
      auto choice = learner.high_level_select(g0, gen, 1.0);
      seen.insert(choice.member);
      exploits += choice.exploit;
    }
    CHECK(seen.size() == 2);
    CHECK(exploits == 0);
  }
}

TEST_CASE("QRM learns the optimal value function on a three-cell line") {
  GridMap map = parse_map("domain: delivery\ngrid:\nS A 1\n");
  RewardMachine rm = delivery_numeric_rm(1);
  Hyperparams hp;
  hp.alpha = 1.0;  // deterministic MDP: full overwriting converges exactly
  hp.epsilon = 0.3;
  Learner learner(Algo::QRM, map, rm, hp, 17);
  for (int e = 0; e < 200; ++e) learner.run_episode(100);

  // Independent oracle: value iteration over the explicit product.
  // Product states along the optimal path: (A, u0) -> (box, u1) via Right,
  // then Left, Left to the station. Optimal value at the start is gamma^2.
  GridState start = env_reset(map);
  double v_start = learner.q.max_value(learner.product_key(start, rm.initial));
  CHECK(v_start == doctest::Approx(std::pow(hp.gamma, 2)));

  std::mt19937_64 probe(3);
  EpisodeRecord greedy = learner.greedy_episode(probe);
  CHECK(greedy.success);
  CHECK(greedy.length == bfs_optimal_length(map, rm));
}

TEST_CASE("CoRM reaches the optimal policy on the two-box example") {
  Learner learner = make_fig_learner(Algo::CoRM, RmKind::Coupled, 3);
  for (int e = 0; e < 600; ++e) learner.run_episode(1000);
  std::mt19937_64 probe(11);
  EpisodeRecord greedy = learner.greedy_episode(probe);
  CHECK(greedy.success);
  CHECK(greedy.length == 10);
  // Greedy probes leave the learner untouched.
  long steps = learner.total_steps();
  learner.greedy_episode(probe);
  CHECK(learner.total_steps() == steps);
}

TEST_CASE("checkpoints round-trip and resume bit-identically") {
  Learner trained = make_fig_learner(Algo::CoRM, RmKind::Coupled, 21);
  for (int e = 0; e < 40; ++e) trained.run_episode(300);

  std::stringstream buffer;
  CheckpointCodec::save(trained, buffer);
  Learner restored = CheckpointCodec::load(buffer);

  CHECK(restored.algo() == trained.algo());
  CHECK(restored.q.values == trained.q.values);
  CHECK(restored.eta.values == trained.eta.values);
  CHECK(restored.used_transitions == trained.used_transitions);
  CHECK(restored.rng == trained.rng);
  CHECK(restored.total_steps() == trained.total_steps());
  CHECK(restored.total_updates() == trained.total_updates());
  CHECK(restored.peak_step_updates() == trained.peak_step_updates());
  CHECK(restored.episodes() == trained.episodes());
  CHECK(restored.reward.best_length == trained.reward.best_length);
  CHECK(serialize_map(restored.map()) == serialize_map(trained.map()));
  CHECK(serialize_rm(restored.machine()) == serialize_rm(trained.machine()));

  // Continuing both copies yields identical trajectories and tables.
  for (int e = 0; e < 25; ++e) {
    EpisodeRecord a = trained.run_episode(300);
    EpisodeRecord b = restored.run_episode(300);
    CHECK(a.length == b.length);
    CHECK(a.success == b.success);
  }
  CHECK(restored.q.values == trained.q.values);
  CHECK(restored.rng == trained.rng);
  CHECK(restored.total_steps() == trained.total_steps());
}

TEST_CASE("checkpoint files round-trip through the filesystem") {
  Learner trained = make_fig_learner(Algo::CRM, RmKind::Agenda, 8);
  for (int e = 0; e < 10; ++e) trained.run_episode(200);
  std::string path = "checkpoint_test.rmckpt";
  save_checkpoint(trained, path);
  Learner restored = load_checkpoint(path);
  CHECK(restored.q.values == trained.q.values);
  CHECK(restored.rng == trained.rng);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_checkpoint("does_not_exist.rmckpt"), CheckpointError);
}

TEST_CASE("corrupt checkpoints are rejected") {
  Learner trained = make_fig_learner(Algo::QRM, RmKind::Numeric, 2);
  trained.run_episode(50);
  std::stringstream buffer;
  CheckpointCodec::save(trained, buffer);
  std::string text = buffer.str();

  std::stringstream bad_magic("not-a-checkpoint 1\n" +
                              text.substr(text.find('\n') + 1));
  CHECK_THROWS_AS(CheckpointCodec::load(bad_magic), CheckpointError);

  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS_AS(CheckpointCodec::load(truncated), CheckpointError);
}
