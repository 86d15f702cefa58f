#include "rmkit/rm_text.hpp"

#include <fstream>
#include <sstream>

namespace rmkit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

StateLabel parse_label_rhs(const std::string& rhs, int line_no) {
  // DEPTH {a,b,...} (agenda | none | subtask NAME | feature NAME)
  std::istringstream in(rhs);
  StateLabel label;
  if (!(in >> label.depth)) throw ParseError(line_no, "bad label depth");
  std::string agenda_tok;
  if (!(in >> agenda_tok) || agenda_tok.front() != '{' ||
      agenda_tok.back() != '}')
    throw ParseError(line_no, "bad label agenda (expected {a,b})");
  std::string inner = agenda_tok.substr(1, agenda_tok.size() - 2);
  if (!inner.empty())
    for (const auto& item : split(inner, ','))
      if (!item.empty()) label.agenda.push_back(item);
  std::sort(label.agenda.begin(), label.agenda.end());
  std::string kind;
  in >> kind;
  if (kind == "agenda") {
    label.objective = StateLabel::Objective::Agenda;
  } else if (kind == "none" || kind.empty()) {
    label.objective = StateLabel::Objective::None;
  } else if (kind == "subtask" || kind == "feature") {
    label.objective = kind == "subtask" ? StateLabel::Objective::Subtask
                                        : StateLabel::Objective::Feature;
    if (!(in >> label.objective_name))
      throw ParseError(line_no, "missing objective name in label");
  } else {
    throw ParseError(line_no, "unknown objective kind '" + kind + "'");
  }
  return label;
}

}  // namespace

RewardMachine parse_rm(const std::string& text) {
  RewardMachine rm;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  std::string section;  // active block: transitions/labels/groups
  bool saw_anything = false;
  std::string initial_name;
  std::vector<std::vector<std::string>> group_names;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    saw_anything = true;

    auto colon = line.find(':');
    bool is_header =
        colon != std::string::npos && line.find("->") == std::string::npos &&
        line.find('=') == std::string::npos;
    if (is_header) {
      std::string key = trim(line.substr(0, colon));
      std::string value = trim(line.substr(colon + 1));
      section.clear();
      if (key == "kind") {
        if (value == "boolean")
          rm.kind = RmKind::Boolean;
        else if (value == "numeric")
          rm.kind = RmKind::Numeric;
        else if (value == "agenda")
          rm.kind = RmKind::Agenda;
        else if (value == "coupled")
          rm.kind = RmKind::Coupled;
        else
          throw ParseError(line_no, "unknown kind '" + value + "'");
      } else if (key == "features") {
        for (const auto& f : split_ws(value)) rm.boolean_features.push_back(f);
      } else if (key == "numerics") {
        if (!value.empty())
          for (const auto& item : split(value, ',')) {
            auto toks = split_ws(item);
            if (toks.size() != 2)
              throw ParseError(line_no, "expected 'name lo..hi'");
            auto dots = toks[1].find("..");
            if (dots == std::string::npos)
              throw ParseError(line_no, "expected 'lo..hi' domain");
            NumericVariable var;
            var.name = toks[0];
            try {
              var.lower_bound = std::stoi(toks[1].substr(0, dots));
              var.upper_bound = std::stoi(toks[1].substr(dots + 2));
            } catch (const std::exception&) {
              throw ParseError(line_no, "bad domain bounds");
            }
            rm.numeric_variables.push_back(var);
          }
      } else if (key == "states") {
        for (const auto& s : split_ws(value)) rm.add_state(s, false);
      } else if (key == "terminal") {
        for (const auto& s : split_ws(value)) rm.add_state(s, true);
      } else if (key == "initial") {
        initial_name = value;
      } else if (key == "transitions" || key == "labels" || key == "groups") {
        section = key;
      } else {
        throw ParseError(line_no, "unknown section '" + key + "'");
      }
      continue;
    }

    if (section == "transitions") {
      // src -> dst [guard] reward
      auto arrow = line.find("->");
      auto lb = line.find('[');
      auto rb = line.rfind(']');
      if (arrow == std::string::npos || lb == std::string::npos ||
          rb == std::string::npos || rb < lb)
        throw ParseError(line_no, "expected 'src -> dst [guard] reward'");
      std::string src = trim(line.substr(0, arrow));
      std::string dst = trim(line.substr(arrow + 2, lb - arrow - 2));
      std::string guard_text = line.substr(lb + 1, rb - lb - 1);
      std::string reward_text = trim(line.substr(rb + 1));
      auto src_id = rm.find_state(src);
      auto dst_id = rm.find_state(dst);
      if (!src_id) throw ParseError(line_no, "unknown state '" + src + "'");
      if (!dst_id) throw ParseError(line_no, "unknown state '" + dst + "'");
      double reward = 0.0;
      try {
        reward = std::stod(reward_text);
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad reward '" + reward_text + "'");
      }
      Guard g;
      try {
        g = parse_guard(guard_text);
      } catch (const SpecificationError& e) {
        throw ParseError(line_no, e.what());
      }
      rm.transitions.push_back({*src_id, std::move(g), reward, *dst_id});
    } else if (section == "labels") {
      auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ParseError(line_no, "expected 'state = depth {agenda} objective'");
      std::string name = trim(line.substr(0, eq));
      auto id = rm.find_state(name);
      if (!id) throw ParseError(line_no, "unknown state '" + name + "'");
      rm.labels[*id] = parse_label_rhs(trim(line.substr(eq + 1)), line_no);
    } else if (section == "groups") {
      group_names.push_back(split_ws(line));
    } else {
      throw ParseError(line_no, "statement outside a section: '" + line + "'");
    }
  }

  if (!saw_anything) throw ParseError(line_no, "empty document");
  if (rm.state_count() == 0) throw ParseError(line_no, "no states declared");
  if (initial_name.empty()) throw ParseError(line_no, "missing initial state");
  auto init = rm.find_state(initial_name);
  if (!init) throw ParseError(line_no, "unknown initial state");
  rm.initial = *init;

  if (rm.kind == RmKind::Coupled) {
    rm.make_singleton_groups();
    if (!group_names.empty()) {
      rm.groups.clear();
      rm.group_of.assign(rm.state_count(), -1);
      for (const auto& names : group_names) {
        std::vector<StateId> members;
        for (const auto& n : names) {
          auto id = rm.find_state(n);
          if (!id) throw ParseError(line_no, "unknown state in group: " + n);
          members.push_back(*id);
        }
        for (StateId m : members) rm.group_of[m] = (int)rm.groups.size();
        rm.groups.push_back(std::move(members));
      }
      // States not mentioned in any group become singletons.
      for (StateId u = 0; u < rm.state_count(); ++u)
        if (rm.group_of[u] < 0) {
          rm.group_of[u] = (int)rm.groups.size();
          rm.groups.push_back({u});
        }
    }
  }

  auto violations = validate_rm(rm);
  if (!violations.empty())
    throw ParseError(line_no, "validation failed: " + violations.front().detail);
  return rm;
}

RewardMachine load_rm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open RM file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_rm(buf.str());
}

std::string serialize_rm(const RewardMachine& rm) {
  std::ostringstream out;
  out << "kind: " << to_string(rm.kind) << "\n";
  out << "features:";
  for (const auto& f : rm.boolean_features) out << " " << f;
  out << "\n";
  if (!rm.numeric_variables.empty()) {
    out << "numerics: ";
    for (size_t i = 0; i < rm.numeric_variables.size(); ++i) {
      const auto& v = rm.numeric_variables[i];
      if (i) out << ", ";
      out << v.name << " " << v.lower_bound << ".." << v.upper_bound;
    }
    out << "\n";
  }
  out << "states:";
  for (StateId u = 0; u < rm.state_count(); ++u)
    if (!rm.is_terminal(u)) out << " " << rm.state_names[u];
  out << "\nterminal:";
  for (StateId u = 0; u < rm.state_count(); ++u)
    if (rm.is_terminal(u)) out << " " << rm.state_names[u];
  out << "\ninitial: " << rm.state_names[rm.initial] << "\n";
  out << "transitions:\n";
  for (const auto& tr : rm.transitions)
    out << "  " << rm.state_names[tr.source] << " -> "
        << rm.state_names[tr.target] << " [" << tr.guard.to_string() << "] "
        << tr.reward << "\n";
  if (!rm.labels.empty()) {
    out << "labels:\n";
    for (const auto& [u, label] : rm.labels) {
      out << "  " << rm.state_names[u] << " = " << label.depth << " {";
      for (size_t i = 0; i < label.agenda.size(); ++i)
        out << (i ? "," : "") << label.agenda[i];
      out << "} ";
      switch (label.objective) {
        case StateLabel::Objective::None:
          out << "none";
          break;
        case StateLabel::Objective::Agenda:
          out << "agenda";
          break;
        case StateLabel::Objective::Subtask:
          out << "subtask " << label.objective_name;
          break;
        case StateLabel::Objective::Feature:
          out << "feature " << label.objective_name;
          break;
      }
      out << "\n";
    }
  }
  if (rm.kind == RmKind::Coupled && !rm.groups.empty()) {
    out << "groups:\n";
    for (const auto& g : rm.groups) {
      if (g.size() < 2) continue;  // singletons are implicit
      out << " ";
      for (StateId m : g) out << " " << rm.state_names[m];
      out << "\n";
    }
  }
  return out.str();
}

void save_rm(const RewardMachine& rm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write RM file: " + path);
  out << serialize_rm(rm);
}

}  // namespace rmkit
