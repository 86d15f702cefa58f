#include "rmkit/grid.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

namespace rmkit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

int popcount(uint32_t v) { return std::popcount(v); }

}  // namespace

int GridMap::objective_count() const {
  int all = domain == GridDomain::Delivery ? (int)boxes.size()
                                           : (int)offices.size();
  return task_objectives < 0 ? all : std::min(task_objectives, all);
}

bool GridMap::in_bounds(const Cell& c) const {
  return c.first >= 0 && c.first < height && c.second >= 0 && c.second < width;
}

bool GridMap::blocked(const Cell& from, const Cell& to) const {
  if (!in_bounds(to)) return true;
  if (from.first == to.first) {
    int c = std::min(from.second, to.second);
    return vwalls.count({from.first, c}) > 0;
  }
  int r = std::min(from.first, to.first);
  return hwalls.count({r, from.second}) > 0;
}

void GridMap::check() const {
  if (width <= 0 || height <= 0)
    throw std::invalid_argument("map has empty grid");
  auto require_cell = [&](const Cell& c, const char* what) {
    if (!in_bounds(c))
      throw std::invalid_argument(std::string(what) + " out of bounds");
  };
  require_cell(agent_start, "agent start");
  for (const auto& b : boxes) require_cell(b, "box");
  for (const auto& o : offices) require_cell(o, "office");
  for (const auto& c : coffee_machines) require_cell(c, "coffee machine");
  for (const auto& d : decorations) require_cell(d, "decoration");
  if (domain == GridDomain::Delivery) {
    require_cell(station, "station");
    if (boxes.empty()) throw std::invalid_argument("delivery map has no boxes");
  } else if (offices.empty() || coffee_machines.empty()) {
    throw std::invalid_argument("office map needs offices and coffee machines");
  }

  // Connectivity: every objective must be reachable from the start without
  // crossing a decoration.
  std::set<Cell> decor(decorations.begin(), decorations.end());
  std::set<Cell> seen{agent_start};
  std::deque<Cell> queue{agent_start};
  while (!queue.empty()) {
    Cell cur = queue.front();
    queue.pop_front();
    const Cell moves[] = {{cur.first - 1, cur.second},
                          {cur.first + 1, cur.second},
                          {cur.first, cur.second - 1},
                          {cur.first, cur.second + 1}};
    for (const auto& next : moves) {
      if (blocked(cur, next) || decor.count(next) || seen.count(next)) continue;
      seen.insert(next);
      queue.push_back(next);
    }
  }
  auto reachable = [&](const Cell& c, const char* what) {
    if (!seen.count(c))
      throw std::invalid_argument(std::string(what) + " unreachable from start");
  };
  if (domain == GridDomain::Delivery) {
    reachable(station, "station");
    for (const auto& b : boxes) reachable(b, "box");
  } else {
    for (int i = 0; i < objective_count(); ++i)
      reachable(offices[i], "office");
    for (const auto& c : coffee_machines) reachable(c, "coffee machine");
  }
}

GridState env_reset(const GridMap& map, uint64_t /*seed*/) {
  map.check();
  GridState s;
  s.pos = map.agent_start;
  s.remaining = (uint32_t{1} << map.objective_count()) - 1;
  return s;
}

FeatureCatalog feature_catalog(const GridMap& map) {
  FeatureCatalog cat;
  int n = map.objective_count();
  if (map.domain == GridDomain::Delivery) {
    for (int i = 0; i < n; ++i)
      cat.subtask_features.push_back("b" + std::to_string(i + 1));
    cat.boolean_objectives = {"s"};
    cat.numeric = {"b", 0, n};
    cat.bindings["b"] = cat.subtask_features;
  } else {
    for (int i = 0; i < n; ++i)
      cat.subtask_features.push_back("o" + std::to_string(i + 1));
    cat.boolean_objectives = {"coffee"};
    cat.numeric = {"o", 0, n};
    cat.bindings["o"] = cat.subtask_features;
  }
  cat.booleans = cat.subtask_features;
  cat.booleans.insert(cat.booleans.end(), cat.boolean_objectives.begin(),
                      cat.boolean_objectives.end());
  return cat;
}

StepOutcome env_step(const GridState& state, Action action,
                     const GridMap& map) {
  if (state.terminated)
    throw std::invalid_argument("env_step on a terminated state");

  StepOutcome out;
  out.next = state;
  GridState& s = out.next;

  Cell target = s.pos;
  switch (action) {
    case Action::Up:
      target.first -= 1;
      break;
    case Action::Down:
      target.first += 1;
      break;
    case Action::Left:
      target.second -= 1;
      break;
    case Action::Right:
      target.second += 1;
      break;
  }
  bool moved = !map.blocked(s.pos, target);
  int prev_count = popcount(state.remaining);
  std::set<std::string> events;

  if (moved) {
    s.pos = target;
    if (map.domain == GridDomain::Delivery) {
      for (size_t i = 0; i < map.boxes.size(); ++i) {
        if (map.boxes[i] != s.pos) continue;
        if ((int)i < map.objective_count() && (s.remaining >> i & 1) &&
            s.carried_box < 0) {
          s.remaining &= ~(uint32_t{1} << i);
          s.carried_box = (int)i;
          events.insert("b" + std::to_string(i + 1));
        }
      }
      if (s.pos == map.station && s.carried_box >= 0) {
        s.carried_box = -1;
        events.insert("s");
      }
    } else {
      bool decorated = std::find(map.decorations.begin(), map.decorations.end(),
                                 s.pos) != map.decorations.end();
      if (decorated) {
        s.terminated = true;
        s.failed = true;
        out.terminated = true;
        out.kind = TerminationKind::EnvFailure;
      } else {
        bool machine =
            std::find(map.coffee_machines.begin(), map.coffee_machines.end(),
                      s.pos) != map.coffee_machines.end();
        if (machine && !s.has_coffee) {
          s.has_coffee = true;
          events.insert("coffee");
        }
        for (int i = 0; i < map.objective_count(); ++i) {
          if (map.offices[i] != s.pos || !s.has_coffee) continue;
          s.has_coffee = false;
          s.remaining &= ~(uint32_t{1} << i);
          events.insert("o" + std::to_string(i + 1));
        }
      }
    }
  }

  auto cat = feature_catalog(map);
  for (const auto& f : cat.booleans)
    out.assignment.booleans[f] = events.count(f) > 0;
  out.assignment.numerics[cat.numeric.name] =
      eval_numeric_feature(cat.numeric, prev_count, popcount(s.remaining));
  return out;
}

uint64_t encode_state(const GridMap& map, const GridState& s) {
  uint64_t pos = (uint64_t)(s.pos.first * map.width + s.pos.second);
  uint64_t carried = (uint64_t)(s.carried_box + 1);
  uint64_t coffee = s.has_coffee ? 1 : 0;
  return pos | (carried << 7) | (coffee << 11) | ((uint64_t)s.remaining << 12);
}

std::set<std::string> consumed_features(const GridMap& map,
                                        const GridState& s) {
  std::set<std::string> out;
  if (map.domain != GridDomain::Delivery) return out;  // objects persist
  for (int i = 0; i < map.objective_count(); ++i)
    if (!(s.remaining >> i & 1)) out.insert("b" + std::to_string(i + 1));
  return out;
}

RewardMachine delivery_numeric_rm(int n_boxes) {
  RewardMachine rm;
  rm.kind = RmKind::Numeric;
  rm.boolean_features = {"s"};
  rm.numeric_variables = {{"b", 0, n_boxes}};
  StateId u0 = rm.add_state("u0");
  StateId u1 = rm.add_state("u1");
  StateId u2 = rm.add_state("u2", true);
  rm.initial = u0;
  auto dec = Guard::numeric("b", NumericFeatureValue::Decreased);
  auto done = Guard::numeric("b", NumericFeatureValue::AtBound);
  auto live = Guard::numeric("b", NumericFeatureValue::NoProgress);
  rm.transitions.push_back({u0, Guard::disj({dec, done}), 0.0, u1});
  rm.transitions.push_back({u0, live, 0.0, u0});
  rm.transitions.push_back(
      {u1, Guard::conj({Guard::boolean("s"), done}), 1.0, u2});
  rm.transitions.push_back(
      {u1, Guard::conj({Guard::boolean("s"), live}), 0.0, u0});
  rm.transitions.push_back({u1, Guard::boolean("s", true), 0.0, u1});
  return rm;
}

RewardMachine office_numeric_rm(int n_offices) {
  RewardMachine rm;
  rm.kind = RmKind::Numeric;
  rm.boolean_features = {"coffee"};
  rm.numeric_variables = {{"o", 0, n_offices}};
  StateId u0 = rm.add_state("u0");
  StateId u1 = rm.add_state("u1");
  StateId u2 = rm.add_state("u2", true);
  rm.initial = u0;
  rm.transitions.push_back({u0, Guard::boolean("coffee"), 0.0, u1});
  rm.transitions.push_back({u0, Guard::boolean("coffee", true), 0.0, u0});
  rm.transitions.push_back(
      {u1, Guard::numeric("o", NumericFeatureValue::AtBound), 1.0, u2});
  rm.transitions.push_back(
      {u1, Guard::numeric("o", NumericFeatureValue::Decreased), 0.0, u0});
  rm.transitions.push_back(
      {u1, Guard::numeric("o", NumericFeatureValue::NoProgress), 0.0, u1});
  return rm;
}

RewardMachine task_numeric_rm(const GridMap& map) {
  return map.domain == GridDomain::Delivery
             ? delivery_numeric_rm(map.objective_count())
             : office_numeric_rm(map.objective_count());
}

GridMap parse_map(const std::string& text) {
  GridMap map;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool in_grid = false;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<int, Cell>> numbered_boxes;
  std::vector<std::pair<int, Cell>> numbered_offices;

  auto parse_edges = [&](const std::string& value, std::set<Cell>& out) {
    std::istringstream es(value);
    std::string tok;
    while (es >> tok) {
      auto comma = tok.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected 'row,col' wall edge");
      out.insert({std::stoi(tok.substr(0, comma)),
                  std::stoi(tok.substr(comma + 1))});
    }
  };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon != std::string::npos && line.find(',') > colon) {
      std::string key = trim(line.substr(0, colon));
      std::string value = trim(line.substr(colon + 1));
      in_grid = false;
      if (key == "domain") {
        if (value == "delivery")
          map.domain = GridDomain::Delivery;
        else if (value == "office")
          map.domain = GridDomain::Office;
        else
          throw std::runtime_error("unknown domain '" + value + "'");
      } else if (key == "task") {
        map.task_objectives = std::stoi(value);
      } else if (key == "grid") {
        in_grid = true;
      } else if (key == "hwalls") {
        parse_edges(value, map.hwalls);
      } else if (key == "vwalls") {
        parse_edges(value, map.vwalls);
      } else {
        throw std::runtime_error("unknown map section '" + key + "'");
      }
      continue;
    }
    if (!in_grid)
      throw std::runtime_error("line " + std::to_string(line_no) +
                               ": cell row outside grid section");
    std::istringstream rs(line);
    std::vector<std::string> row;
    std::string tok;
    while (rs >> tok) row.push_back(tok);
    rows.push_back(std::move(row));
  }

  map.height = (int)rows.size();
  map.width = map.height ? (int)rows[0].size() : 0;
  for (int r = 0; r < map.height; ++r) {
    if ((int)rows[r].size() != map.width)
      throw std::runtime_error("ragged grid row " + std::to_string(r));
    for (int c = 0; c < map.width; ++c) {
      const std::string& tok = rows[r][c];
      Cell cell{r, c};
      if (tok == ".") continue;
      if (tok == "A")
        map.agent_start = cell;
      else if (tok == "S")
        map.station = cell;
      else if (tok == "C")
        map.coffee_machines.push_back(cell);
      else if (tok == "*")
        map.decorations.push_back(cell);
      else if (tok.size() == 1 && std::isdigit((unsigned char)tok[0]))
        numbered_boxes.push_back({tok[0] - '0', cell});
      else if (tok[0] == 'O')
        numbered_offices.push_back({std::stoi(tok.substr(1)), cell});
      else
        throw std::runtime_error("unknown cell token '" + tok + "'");
    }
  }
  std::sort(numbered_boxes.begin(), numbered_boxes.end());
  for (const auto& [n, cell] : numbered_boxes) map.boxes.push_back(cell);
  std::sort(numbered_offices.begin(), numbered_offices.end());
  for (const auto& [n, cell] : numbered_offices) map.offices.push_back(cell);
  map.check();
  return map;
}

GridMap load_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map(buf.str());
}

std::string serialize_map(const GridMap& map) {
  std::ostringstream out;
  out << "domain: "
      << (map.domain == GridDomain::Delivery ? "delivery" : "office") << "\n";
  if (map.task_objectives >= 0) out << "task: " << map.task_objectives << "\n";
  out << "grid:\n";
  std::vector<std::vector<std::string>> rows(
      map.height, std::vector<std::string>(map.width, "."));
  auto put = [&](const Cell& c, std::string tok) {
    rows[c.first][c.second] = std::move(tok);
  };
  for (size_t i = 0; i < map.boxes.size(); ++i)
    put(map.boxes[i], std::to_string(i + 1));
  for (size_t i = 0; i < map.offices.size(); ++i)
    put(map.offices[i], "O" + std::to_string(i + 1));
  for (const auto& c : map.coffee_machines) put(c, "C");
  for (const auto& d : map.decorations) put(d, "*");
  if (map.domain == GridDomain::Delivery) put(map.station, "S");
  put(map.agent_start, "A");
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << row[c];
    out << "\n";
  }
  auto emit_edges = [&](const char* key, const std::set<Cell>& edges) {
    if (edges.empty()) return;
    out << key << ":";
    for (const auto& [r, c] : edges) out << " " << r << "," << c;
    out << "\n";
  };
  emit_edges("hwalls", map.hwalls);
  emit_edges("vwalls", map.vwalls);
  return out.str();
}

std::string render_map(const GridMap& map) {
  // Cell contents with wall strokes between them.
  std::vector<std::vector<std::string>> rows(
      map.height, std::vector<std::string>(map.width, " ."));
  auto put = [&](const Cell& c, const std::string& tok) {
    rows[c.first][c.second] = tok.size() == 1 ? " " + tok : tok;
  };
  for (size_t i = 0; i < map.boxes.size(); ++i)
    put(map.boxes[i], std::to_string(i + 1));
  for (size_t i = 0; i < map.offices.size(); ++i)
    put(map.offices[i], "O" + std::to_string(i + 1));
  for (const auto& c : map.coffee_machines) put(c, "C");
  for (const auto& d : map.decorations) put(d, "*");
  if (map.domain == GridDomain::Delivery) put(map.station, "S");
  put(map.agent_start, "A");

  std::ostringstream out;
  out << "+";
  for (int c = 0; c < map.width; ++c) out << "--+";
  out << "\n";
  for (int r = 0; r < map.height; ++r) {
    out << "|";
    for (int c = 0; c < map.width; ++c) {
      out << rows[r][c];
      bool wall = c + 1 == map.width || map.vwalls.count({r, c});
      out << (wall ? "|" : " ");
    }
    out << "\n+";
    for (int c = 0; c < map.width; ++c) {
      bool wall = r + 1 == map.height || map.hwalls.count({r, c});
      out << (wall ? "--" : "  ") << "+";
    }
    out << "\n";
  }
  return out.str();
}

GridMap delivery_random_map(int width, int height, int n_boxes,
                            uint64_t seed) {
  if ((int64_t)width * height < n_boxes + 2)
    throw std::invalid_argument("grid too small for requested boxes");
  GridMap map;
  map.domain = GridDomain::Delivery;
  map.width = width;
  map.height = height;
  std::vector<Cell> cells;
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) cells.push_back({r, c});
  std::mt19937_64 rng(seed);
  for (size_t i = cells.size(); i > 1; --i) {
    std::uniform_int_distribution<size_t> pick(0, i - 1);
    std::swap(cells[i - 1], cells[pick(rng)]);
  }
  map.agent_start = cells[0];
  map.station = cells[1];
  for (int i = 0; i < n_boxes; ++i) map.boxes.push_back(cells[2 + i]);
  map.check();
  return map;
}

GridMap delivery_example_map() {
  return parse_map(
      "domain: delivery\n"
      "grid:\n"
      "1 S .\n"
      ". . A\n"
      ". . .\n"
      "2 . .\n");
}

GridMap office_example_map(int task_offices) {
  std::string text =
      "domain: office\n"
      "task: " + std::to_string(task_offices) + "\n"
      "grid:\n"
      ". . . . . . . . . . . .\n"
      ". O3 . . * . . * . . O4 .\n"
      ". . . C . . . . . . . .\n"
      ". . . . . . . . . . . .\n"
      ". * . . O1 . . O2 . . * .\n"
      ". . . . . . . . . . . .\n"
      ". . . . . . . . C . . .\n"
      ". O6 A . * . . * . . O5 .\n"
      ". . . . . . . . . . . .\n"
      "hwalls: 2,0 2,2 2,3 2,5 2,6 2,8 2,9 2,11 5,0 5,2 5,3 5,5 5,6 5,8 5,9 "
      "5,11\n"
      "vwalls: 0,2 2,2 3,2 5,2 6,2 8,2 0,5 2,5 3,5 5,5 6,5 8,5 0,8 2,8 3,8 "
      "5,8 6,8 8,8\n";
  return parse_map(text);
}

}  // namespace rmkit
