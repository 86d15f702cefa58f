#ifndef RMKIT_GRID_HPP
#define RMKIT_GRID_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rmkit/reward_machine.hpp"
#include "rmkit/unroll.hpp"

namespace rmkit {

enum class GridDomain { Delivery, Office };
enum class Action { Up, Down, Left, Right };

inline constexpr int kNumActions = 4;

using Cell = std::pair<int, int>;  // (row, col), row 0 at the top

/// Static description of a gridworld instance. Walls are cell-edge barriers:
/// hwalls(r, c) blocks movement between (r, c) and (r+1, c); vwalls(r, c)
/// blocks movement between (r, c) and (r, c+1). The outer boundary is
/// always closed.
struct GridMap {
  GridDomain domain = GridDomain::Delivery;
  int width = 0;
  int height = 0;
  std::set<Cell> hwalls;
  std::set<Cell> vwalls;
  Cell agent_start{0, 0};

  // Delivery
  std::vector<Cell> boxes;  // box i fires feature b{i+1}
  Cell station{0, 0};

  // Office
  std::vector<Cell> offices;  // office i fires feature o{i+1}
  std::vector<Cell> coffee_machines;
  std::vector<Cell> decorations;

  /// Number of objectives the task covers (boxes or offices). Defaults to
  /// all objects on the map; Office tasks may use a prefix of the offices.
  int task_objectives = -1;

  int objective_count() const;
  bool in_bounds(const Cell& c) const;
  bool blocked(const Cell& from, const Cell& to) const;
  void check() const;  // throws std::invalid_argument on malformed maps
};

/// Mutable episode state of the gridworld MDP.
struct GridState {
  Cell pos{0, 0};
  int carried_box = -1;      // Delivery: index of the carried box, -1 if none
  bool has_coffee = false;   // Office
  uint32_t remaining = 0;    // uncollected boxes / undelivered task offices
  bool terminated = false;
  bool failed = false;
};

enum class TerminationKind { None, EnvFailure };

struct StepOutcome {
  GridState next;
  TruthAssignment assignment;
  bool terminated = false;
  TerminationKind kind = TerminationKind::None;
};

GridState env_reset(const GridMap& map, uint64_t seed = 0);
StepOutcome env_step(const GridState& state, Action action, const GridMap& map);

/// Boolean features, the progress-counting numeric variable, and the
/// variable-to-subtask bindings exposed by a map.
struct FeatureCatalog {
  std::vector<std::string> booleans;
  NumericVariable numeric;
  SubtaskBindings bindings;
  std::vector<std::string> subtask_features;  // bound subtasks, in order
  std::vector<std::string> boolean_objectives;  // non-subtask events (s/coffee)
};

FeatureCatalog feature_catalog(const GridMap& map);

/// Compact product-state key for Q-tables and search visited sets.
uint64_t encode_state(const GridMap& map, const GridState& s);

/// Features that can never fire again in this episode (collected boxes).
std::set<std::string> consumed_features(const GridMap& map,
                                        const GridState& s);

/// Numeric-RM template for collecting and delivering n boxes.
RewardMachine delivery_numeric_rm(int n_boxes);
/// Numeric-RM template for delivering coffee to n offices in any order.
RewardMachine office_numeric_rm(int n_offices);
/// The matching numeric template for a map's domain and task size.
RewardMachine task_numeric_rm(const GridMap& map);

GridMap parse_map(const std::string& text);
GridMap load_map(const std::string& path);
std::string serialize_map(const GridMap& map);
/// Human-readable rendering with wall strokes, for `rm env show`.
std::string render_map(const GridMap& map);

/// Deterministic delivery instance generator: station, agent, and n distinct
/// box cells drawn from the given seed on an open width x height grid.
GridMap delivery_random_map(int width, int height, int n_boxes, uint64_t seed);

/// The shipped 3x4 two-box delivery instance.
GridMap delivery_example_map();
/// The shipped 12x9 six-office instance with two coffee machines and six
/// decorations. `task_offices` selects how many offices the task covers.
GridMap office_example_map(int task_offices = 6);

}  // namespace rmkit

#endif
