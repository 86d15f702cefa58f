#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rmkit/grid.hpp"
#include "rmkit/guard.hpp"
#include "rmkit/reward_machine.hpp"
#include "rmkit/rm_text.hpp"
#include "rmkit/unroll.hpp"

using namespace rmkit;

namespace {

// Independent restatement of the change-category partition, written against
// the definition rather than the implementation: the goal bound dominates,
// then strict decrease, then everything else.
NumericFeatureValue category_oracle(int prev, int curr, int lb) {
  if (curr == lb) return NumericFeatureValue::AtBound;
  if (curr < prev) return NumericFeatureValue::Decreased;
  return NumericFeatureValue::NoProgress;
}

TruthAssignment assign(std::initializer_list<std::pair<std::string, bool>> bs,
                       std::initializer_list<std::pair<std::string, NumericFeatureValue>> ns = {}) {
  TruthAssignment t;
  for (const auto& [k, v] : bs) t.booleans[k] = v;
  for (const auto& [k, v] : ns) t.numerics[k] = v;
  return t;
}

}  // namespace

TEST_CASE("numeric feature categories match the definition exhaustively") {
  NumericVariable var{"b", 0, 5};
  for (int prev = 0; prev <= 5; ++prev)
    for (int curr = 0; curr <= 5; ++curr)
      CHECK(eval_numeric_feature(var, prev, curr) ==
            category_oracle(prev, curr, 0));
  // Shifted lower bound.
  NumericVariable shifted{"w", 2, 6};
  for (int prev = 2; prev <= 6; ++prev)
    for (int curr = 2; curr <= 6; ++curr)
      CHECK(eval_numeric_feature(shifted, prev, curr) ==
            category_oracle(prev, curr, 2));
}

TEST_CASE("numeric feature hand cases") {
  CHECK(eval_numeric_feature(2, 1, 0) == NumericFeatureValue::Decreased);
  CHECK(eval_numeric_feature(1, 0, 0) == NumericFeatureValue::AtBound);
  CHECK(eval_numeric_feature(2, 2, 0) == NumericFeatureValue::NoProgress);
  CHECK(eval_numeric_feature(0, 0, 0) == NumericFeatureValue::AtBound);
  CHECK(eval_numeric_feature(1, 2, 0) == NumericFeatureValue::NoProgress);
}

TEST_CASE("numeric feature domain checking") {
  NumericVariable var{"b", 0, 2};
  CHECK_THROWS_AS(eval_numeric_feature(var, 3, 1), DomainViolation);
  CHECK_THROWS_AS(eval_numeric_feature(var, 1, -1), DomainViolation);
}

TEST_CASE("truth assignment lookups throw on undeclared names") {
  auto t = assign({{"a", true}});
  CHECK(t.boolean("a"));
  CHECK_THROWS_AS((void)t.boolean("missing"), std::out_of_range);
  CHECK_THROWS_AS((void)t.numeric("missing"), std::out_of_range);
}

TEST_CASE("guard parsing, precedence, and evaluation") {
  Guard g = parse_guard("a | b & !c");
  CHECK(g.eval(assign({{"a", false}, {"b", true}, {"c", false}})));
  CHECK(g.eval(assign({{"a", true}, {"b", false}, {"c", true}})));
  CHECK_FALSE(g.eval(assign({{"a", false}, {"b", true}, {"c", true}})));
  CHECK_FALSE(g.eval(assign({{"a", false}, {"b", false}, {"c", false}})));

  Guard grouped = parse_guard("(a | b) & !c");
  CHECK_FALSE(grouped.eval(assign({{"a", true}, {"b", false}, {"c", true}})));

  Guard numeric = parse_guard("s & done(b)");
  CHECK(numeric.eval(
      assign({{"s", true}}, {{"b", NumericFeatureValue::AtBound}})));
  CHECK_FALSE(numeric.eval(
      assign({{"s", true}}, {{"b", NumericFeatureValue::Decreased}})));
}

TEST_CASE("guard atom inventories") {
  Guard g = parse_guard("dec(b) | done(b) & !s & live(w)");
  CHECK(g.boolean_atoms() == std::set<std::string>{"s"});
  CHECK(g.numeric_atoms() == std::set<std::string>{"b", "w"});
  CHECK(g.consuming_numeric_atoms() == std::set<std::string>{"b"});
  CHECK(parse_guard("a & !b").positive_boolean_atoms() ==
        std::set<std::string>{"a"});
}

TEST_CASE("guard round-trips through to_string") {
  for (const char* text :
       {"a", "!a", "a & b", "a | b & c", "(a | b) & !c", "dec(b) | done(b)",
        "s & done(b)", "live(w)", "true"}) {
    Guard g = parse_guard(text);
    Guard again = parse_guard(g.to_string());
    CHECK(g.to_string() == again.to_string());
  }
}

TEST_CASE("guard syntax errors") {
  CHECK_THROWS_AS(parse_guard(""), SpecificationError);
  CHECK_THROWS_AS(parse_guard("a &"), SpecificationError);
  CHECK_THROWS_AS(parse_guard("(a | b"), SpecificationError);
  CHECK_THROWS_AS(parse_guard("dec()"), SpecificationError);
  CHECK_THROWS_AS(parse_guard("a b"), SpecificationError);
}

TEST_CASE("rm_step follows guards and completes with silent self-loops") {
  RewardMachine rm = delivery_numeric_rm(2);
  auto r = rm_step(rm, 0, assign({{"s", false}},
                                 {{"b", NumericFeatureValue::Decreased}}));
  CHECK(r.next == 1);
  CHECK(r.reward == 0.0);
  CHECK(r.fired.has_value());

  // No guard matches: the completion rule self-loops with reward 0.
  auto loop = rm_step(rm, 1, assign({{"s", true}},
                                    {{"b", NumericFeatureValue::Decreased}}));
  CHECK(loop.next == 1);
  CHECK_FALSE(loop.fired.has_value());

  auto done = rm_step(rm, 1, assign({{"s", true}},
                                    {{"b", NumericFeatureValue::AtBound}}));
  CHECK(done.next == 2);
  CHECK(done.reward == 1.0);
}

TEST_CASE("rm_step rejects double fires") {
  RewardMachine rm;
  rm.kind = RmKind::Boolean;
  rm.boolean_features = {"a"};
  rm.add_state("u0");
  rm.add_state("u1");
  rm.add_state("u2");
  rm.transitions.push_back({0, parse_guard("a"), 0.0, 1});
  rm.transitions.push_back({0, parse_guard("a"), 0.0, 2});
  CHECK_THROWS_AS(rm_step(rm, 0, assign({{"a", true}})),
                  DeterminismViolationError);
}

TEST_CASE("rm_step_group fires the unique member and absorbs self-loops") {
  auto coupled = split_to_coupled(
      unroll_to_agenda(delivery_numeric_rm(2), {{"b", {"b1", "b2"}}}));
  int g0 = coupled.initial_group();
  CHECK(coupled.groups[g0].size() == 2);

  auto quiet = rm_step_group(coupled, g0,
                             assign({{"b1", false}, {"b2", false}, {"s", false}}));
  CHECK_FALSE(quiet.fired.has_value());

  auto fire = rm_step_group(coupled, g0,
                            assign({{"b1", false}, {"b2", true}, {"s", false}}));
  REQUIRE(fire.fired.has_value());
  CHECK(coupled.labels.at(fire.fired_member).objective_name == "b2");
  CHECK(coupled.labels.at(fire.next).agenda == std::vector<std::string>{"b1"});

  CHECK_THROWS_AS(rm_step_group(coupled, g0,
                                assign({{"b1", true}, {"b2", true}, {"s", false}})),
                  DeterminismViolationError);
}

TEST_CASE("validate_rm accepts the shipped machines") {
  CHECK(validate_rm(delivery_numeric_rm(2)).empty());
  CHECK(validate_rm(delivery_numeric_rm(5)).empty());
  CHECK(validate_rm(office_numeric_rm(3)).empty());
  auto agenda = unroll_to_agenda(delivery_numeric_rm(3), {{"b", {"b1", "b2", "b3"}}});
  CHECK(validate_rm(agenda).empty());
  CHECK(validate_rm(split_to_coupled(agenda)).empty());
}

TEST_CASE("validate_rm flags structural violations") {
  RewardMachine rm;
  rm.kind = RmKind::Boolean;
  rm.boolean_features = {"a"};
  rm.add_state("u0");
  rm.add_state("uf", true);
  rm.transitions.push_back({1, parse_guard("a"), 0.0, 0});
  auto v = validate_rm(rm);
  REQUIRE_FALSE(v.empty());
  CHECK(v.front().kind == ViolationKind::TerminalOutgoing);

  RewardMachine undeclared;
  undeclared.kind = RmKind::Boolean;
  undeclared.add_state("u0");
  undeclared.add_state("uf", true);
  undeclared.transitions.push_back({0, parse_guard("mystery"), 1.0, 1});
  bool found = false;
  for (const auto& violation : validate_rm(undeclared))
    found |= violation.kind == ViolationKind::UndeclaredAtom;
  CHECK(found);

  RewardMachine nondet;
  nondet.kind = RmKind::Boolean;
  nondet.boolean_features = {"a"};
  nondet.add_state("u0");
  nondet.add_state("u1");
  nondet.add_state("u2", true);
  nondet.transitions.push_back({0, parse_guard("a"), 0.0, 1});
  nondet.transitions.push_back({0, parse_guard("a"), 1.0, 2});
  found = false;
  for (const auto& violation : validate_rm(nondet))
    found |= violation.kind == ViolationKind::Determinism;
  CHECK(found);
}

TEST_CASE("validate_rm requires labels on agenda machines") {
  auto agenda = unroll_to_agenda(delivery_numeric_rm(2), {{"b", {"b1", "b2"}}});
  agenda.labels.erase(agenda.labels.begin());
  bool found = false;
  for (const auto& violation : validate_rm(agenda))
    found |= violation.kind == ViolationKind::LabelMissing;
  CHECK(found);
}

TEST_CASE("parse_rm round-trips and reports errors") {
  RewardMachine fig = delivery_numeric_rm(2);
  std::string text = serialize_rm(fig);
  RewardMachine parsed = parse_rm(text);
  CHECK(parsed.state_count() == 3);
  CHECK(parsed.transitions.size() == 5);
  int terminals = 0;
  for (StateId u = 0; u < parsed.state_count(); ++u)
    terminals += parsed.is_terminal(u);
  CHECK(terminals == 1);
  CHECK(serialize_rm(parsed) == text);

  CHECK_THROWS_AS(parse_rm(""), ParseError);
  CHECK_THROWS_AS(parse_rm("kind: numeric\nstates: u0\ninitial: u0\n"
                           "transitions:\n  u0 -> missing [true] 0\n"),
                  ParseError);
}

TEST_CASE("coupled machines round-trip with groups and labels") {
  auto coupled = split_to_coupled(
      unroll_to_agenda(delivery_numeric_rm(3), {{"b", {"b1", "b2", "b3"}}}));
  std::string text = serialize_rm(coupled);
  RewardMachine parsed = parse_rm(text);
  CHECK(serialize_rm(parsed) == text);
  CHECK(parsed.groups.size() == coupled.groups.size());
  CHECK(parsed.labels.size() == coupled.labels.size());
}
