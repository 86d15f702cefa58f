#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "rmkit/grid.hpp"
#include "rmkit/guard.hpp"
#include "rmkit/oracle.hpp"
#include "rmkit/unroll.hpp"

using namespace rmkit;

namespace {

GridState walk(const GridMap& map, GridState s,
               std::initializer_list<Action> actions) {
  for (Action a : actions) s = env_step(s, a, map).next;
  return s;
}

// Depth-limited search over the environment/RM product, written
// independently of the BFS oracle. The memo stores, per product state, the
// largest budget that has already failed from it.
using FailMemo = std::map<uint64_t, int>;

bool dfs_reaches(const GridMap& map, const RewardMachine& rm,
                 const GridState& s, int rm_pos, int budget, bool coupled,
                 FailMemo& memo) {
  if (budget == 0) return false;
  uint64_t key = (encode_state(map, s) << 6) | (uint64_t)rm_pos;
  if (auto it = memo.find(key); it != memo.end() && it->second >= budget)
    return false;
  for (int a = 0; a < kNumActions; ++a) {
    StepOutcome out = env_step(s, (Action)a, map);
    if (out.terminated) continue;
    RmStepResult step = coupled ? rm_step_group(rm, rm_pos, out.assignment)
                                : rm_step(rm, rm_pos, out.assignment);
    if (step.fired && rm.is_terminal(step.next) && step.reward > 0) return true;
    int next_pos = coupled
                       ? (step.fired ? rm.group_of[step.next] : rm_pos)
                       : step.next;
    if (dfs_reaches(map, rm, out.next, next_pos, budget - 1, coupled, memo))
      return true;
  }
  memo[key] = budget;
  return false;
}

int dfs_optimal(const GridMap& map, const RewardMachine& rm, int cap) {
  bool coupled = rm.kind == RmKind::Coupled;
  GridState start = env_reset(map);
  int pos = coupled ? rm.initial_group() : rm.initial;
  for (int depth = 1; depth <= cap; ++depth) {
    FailMemo memo;
    if (dfs_reaches(map, rm, start, pos, depth, coupled, memo)) return depth;
  }
  return -1;
}

SubtaskBindings bindings_of(const GridMap& map) {
  return feature_catalog(map).bindings;
}

}  // namespace

TEST_CASE("map files round-trip") {
  for (const GridMap& map : {delivery_example_map(), office_example_map(6),
                             delivery_random_map(5, 4, 3, 11)}) {
    std::string text = serialize_map(map);
    CHECK(serialize_map(parse_map(text)) == text);
  }
}

TEST_CASE("map parser rejects malformed documents") {
  CHECK_THROWS(parse_map("domain: delivery\ngrid:\n. A\n. S 1\n"));  // ragged
  CHECK_THROWS(parse_map("domain: delivery\ngrid:\nA ? S\n"));  // bad token
  CHECK_THROWS(parse_map("domain: nowhere\ngrid:\nA\n"));
  // Box walled off from the agent.
  CHECK_THROWS(parse_map("domain: delivery\ngrid:\nA S 1\nvwalls: 0,1\n"));
  // Path to the box exists only through a decoration.
  CHECK_THROWS(parse_map(
      "domain: office\ngrid:\nA * C O1\nhwalls:\n"));
}

TEST_CASE("shipped example maps match their documented layouts") {
  GridMap d = delivery_example_map();
  CHECK(d.width == 3);
  CHECK(d.height == 4);
  CHECK(d.agent_start == Cell{1, 2});
  CHECK(d.station == Cell{0, 1});
  CHECK(d.boxes == std::vector<Cell>{{0, 0}, {3, 0}});

  GridMap o = office_example_map(6);
  CHECK(o.width == 12);
  CHECK(o.height == 9);
  CHECK(o.offices.size() == 6);
  CHECK(o.coffee_machines.size() == 2);
  CHECK(o.decorations.size() == 6);
  CHECK(o.agent_start == Cell{7, 2});
  CHECK(o.offices[0] == Cell{4, 4});  // o1 in the central-left room
  CHECK(o.objective_count() == 6);
  CHECK(office_example_map(2).objective_count() == 2);
}

TEST_CASE("movement respects bounds and edge walls") {
  GridMap map = parse_map("domain: delivery\ngrid:\nA .\nS 1\nhwalls: 0,0\n");
  GridState s = env_reset(map);
  CHECK(s.pos == Cell{0, 0});
  // Down is blocked by the edge wall, up and left by the boundary.
  CHECK(env_step(s, Action::Down, map).next.pos == Cell{0, 0});
  CHECK(env_step(s, Action::Up, map).next.pos == Cell{0, 0});
  CHECK(env_step(s, Action::Left, map).next.pos == Cell{0, 0});
  CHECK(env_step(s, Action::Right, map).next.pos == Cell{0, 1});
  // A blocked move fires nothing.
  auto blocked = env_step(s, Action::Down, map);
  for (const auto& [name, v] : blocked.assignment.booleans) CHECK_FALSE(v);
}

TEST_CASE("delivery pickup and drop-off semantics") {
  GridMap map = delivery_example_map();
  GridState s = env_reset(map);
  CHECK(s.remaining == 0b11u);

  // Walk from A (1,2) to box 1 at (0,0).
  s = walk(map, s, {Action::Up, Action::Left});
  auto pickup = env_step(s, Action::Left, map);
  CHECK(pickup.assignment.boolean("b1"));
  CHECK_FALSE(pickup.assignment.boolean("s"));
  CHECK(pickup.assignment.numeric("b") == NumericFeatureValue::Decreased);
  CHECK(pickup.next.carried_box == 0);
  CHECK(pickup.next.remaining == 0b10u);
  CHECK(consumed_features(map, pickup.next) == std::set<std::string>{"b1"});

  // Deliver at the station: s fires, hands empty, count unchanged.
  auto dropoff = env_step(pickup.next, Action::Right, map);
  CHECK(dropoff.assignment.boolean("s"));
  CHECK(dropoff.assignment.numeric("b") == NumericFeatureValue::NoProgress);
  CHECK(dropoff.next.carried_box == -1);

  // Re-entering the station empty-handed fires nothing.
  auto idle = env_step(walk(map, dropoff.next, {Action::Down}), Action::Up, map);
  CHECK_FALSE(idle.assignment.boolean("s"));

  // Stepping onto the remaining box while carrying picks nothing up.
  GridState carrying = pickup.next;
  carrying.pos = {2, 0};
  auto no_pickup = env_step(carrying, Action::Down, map);
  CHECK_FALSE(no_pickup.assignment.boolean("b2"));
  CHECK(no_pickup.next.carried_box == 0);
  CHECK(no_pickup.next.remaining == 0b10u);

  // Final pickup reaches the bound.
  GridState empty = dropoff.next;
  empty.pos = {2, 0};
  auto last = env_step(empty, Action::Down, map);
  CHECK(last.assignment.boolean("b2"));
  CHECK(last.assignment.numeric("b") == NumericFeatureValue::AtBound);
}

TEST_CASE("office coffee, delivery, and decoration semantics") {
  GridMap map = office_example_map(2);
  GridState s = env_reset(map);
  CHECK(s.pos == Cell{7, 2});

  // Coffee machine at (2,3): stepping on it grabs coffee once.
  GridState above{{1, 3}, -1, false, s.remaining};
  auto grab = env_step(above, Action::Down, map);
  CHECK(grab.assignment.boolean("coffee"));
  CHECK(grab.next.has_coffee);
  auto again = env_step(walk(map, grab.next, {Action::Up}), Action::Down, map);
  CHECK_FALSE(again.assignment.boolean("coffee"));

  // Office o1 at (4,4): delivering consumes the coffee and fires o1.
  GridState at_door{{3, 4}, -1, true, s.remaining};
  auto deliver = env_step(at_door, Action::Down, map);
  CHECK(deliver.assignment.boolean("o1"));
  CHECK_FALSE(deliver.next.has_coffee);
  CHECK(deliver.next.remaining == 0b10u);
  CHECK(deliver.assignment.numeric("o") == NumericFeatureValue::Decreased);
  // Offices are never consumed from the environment.
  CHECK(consumed_features(map, deliver.next).empty());
  // Without coffee, entering an office fires nothing.
  auto dry = env_step(GridState{{3, 4}, -1, false, s.remaining}, Action::Down, map);
  CHECK_FALSE(dry.assignment.boolean("o1"));

  // Decoration at (4,1) ends the episode.
  auto crash = env_step(GridState{{3, 1}, -1, false, s.remaining}, Action::Down, map);
  CHECK(crash.terminated);
  CHECK(crash.kind == TerminationKind::EnvFailure);
  CHECK(crash.next.failed);
  CHECK_THROWS(env_step(crash.next, Action::Up, map));
}

TEST_CASE("feature catalogs") {
  auto d = feature_catalog(delivery_example_map());
  CHECK(d.booleans == std::vector<std::string>{"b1", "b2", "s"});
  CHECK(d.numeric.name == "b");
  CHECK(d.numeric.lower_bound == 0);
  CHECK(d.numeric.upper_bound == 2);
  CHECK(d.bindings.at("b") == std::vector<std::string>{"b1", "b2"});

  auto o = feature_catalog(office_example_map(3));
  CHECK(o.booleans == std::vector<std::string>{"o1", "o2", "o3", "coffee"});
  CHECK(o.numeric.upper_bound == 3);

  auto single = feature_catalog(delivery_random_map(3, 3, 1, 5));
  CHECK(single.bindings.at("b") == std::vector<std::string>{"b1"});
}

TEST_CASE("environment steps are deterministic and conserve boxes") {
  GridMap map = delivery_example_map();
  GridState s = env_reset(map);
  std::mt19937_64 rng(3);
  int delivered = 0;
  for (int i = 0; i < 500; ++i) {
    Action a = (Action)(rng() % kNumActions);
    StepOutcome o1 = env_step(s, a, map);
    StepOutcome o2 = env_step(s, a, map);
    CHECK(o1.next.pos == o2.next.pos);
    CHECK(o1.next.remaining == o2.next.remaining);
    if (o1.assignment.boolean("s")) ++delivered;
    int held = o1.next.carried_box >= 0 ? 1 : 0;
    CHECK(std::popcount(o1.next.remaining) + held + delivered == 2);
    s = o1.next;
  }
}

TEST_CASE("encode_state is injective over an episode's reachable states") {
  GridMap map = delivery_example_map();
  std::set<uint64_t> keys;
  std::set<std::tuple<Cell, int, uint32_t>> states;
  std::vector<GridState> frontier{env_reset(map)};
  states.insert({frontier[0].pos, frontier[0].carried_box, frontier[0].remaining});
  keys.insert(encode_state(map, frontier[0]));
  while (!frontier.empty()) {
    GridState cur = frontier.back();
    frontier.pop_back();
    for (int a = 0; a < kNumActions; ++a) {
      GridState next = env_step(cur, (Action)a, map).next;
      if (states.insert({next.pos, next.carried_box, next.remaining}).second) {
        CHECK(keys.insert(encode_state(map, next)).second);
        frontier.push_back(next);
      }
    }
  }
  CHECK(states.size() > 30);
}

TEST_CASE("trivial oracle case: one box on a three-cell line") {
  GridMap map = parse_map("domain: delivery\ngrid:\nS A 1\n");
  // Right to pick up, two lefts to deliver.
  CHECK(bfs_optimal_length(map, delivery_numeric_rm(1)) == 3);
}

TEST_CASE("BFS oracle agrees with exhaustive search") {
  GridMap fig = delivery_example_map();
  RewardMachine numeric = delivery_numeric_rm(2);
  auto boolean = unroll_to_boolean(numeric, bindings_of(fig));
  auto agenda = unroll_to_agenda(numeric, bindings_of(fig));
  auto coupled = split_to_coupled(agenda);
  int expected = dfs_optimal(fig, numeric, 12);
  CHECK(expected == 10);
  for (const RewardMachine* rm : {&numeric, &boolean, &agenda, &coupled})
    CHECK(bfs_optimal_length(fig, *rm) == expected);

  GridMap tiny = delivery_random_map(3, 3, 2, 4);
  CHECK(bfs_optimal_length(tiny, delivery_numeric_rm(2)) ==
        dfs_optimal(tiny, delivery_numeric_rm(2), 14));

  GridMap office = office_example_map(1);
  CHECK(bfs_optimal_length(office, office_numeric_rm(1)) ==
        dfs_optimal(office, office_numeric_rm(1), 20));
}

TEST_CASE("oracle reports unreachable goals and enforces its node budget") {
  GridMap map = delivery_example_map();
  // A guard no delivery step can satisfy: pickup and drop-off never fire
  // together, so the goal is unreachable.
  RewardMachine impossible;
  impossible.kind = RmKind::Boolean;
  impossible.boolean_features = {"b1", "b2", "s"};
  impossible.add_state("u0");
  impossible.add_state("uf", true);
  impossible.transitions.push_back({0, parse_guard("b1 & s"), 1.0, 1});
  CHECK(bfs_optimal_length(map, impossible) == -1);

  // Budget too small for the product.
  CHECK_THROWS_AS(bfs_optimal_length(map, delivery_numeric_rm(2), 5),
                  SearchBudgetError);
}

TEST_CASE("random map generation is deterministic and well-formed") {
  GridMap a = delivery_random_map(6, 6, 3, 9);
  GridMap b = delivery_random_map(6, 6, 3, 9);
  CHECK(serialize_map(a) == serialize_map(b));
  CHECK(serialize_map(a) != serialize_map(delivery_random_map(6, 6, 3, 10)));
  std::set<Cell> cells{a.agent_start, a.station};
  for (const auto& box : a.boxes) cells.insert(box);
  CHECK(cells.size() == 5);  // all distinct
  CHECK_THROWS(delivery_random_map(2, 2, 5, 1));
}
