#include "rmkit/dot.hpp"

#include <sstream>

namespace rmkit {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

void emit_node(std::ostream& out, const RewardMachine& rm, StateId u,
               const std::string& indent) {
  out << indent << "n" << u << " [label=\"" << escape(rm.state_names[u])
      << "\"";
  if (rm.is_terminal(u)) out << ", shape=doublecircle";
  out << "];\n";
}

}  // namespace

std::string export_dot(const RewardMachine& rm) {
  std::ostringstream out;
  out << "digraph rm {\n";
  out << "  rankdir=LR;\n";
  out << "  node [shape=circle];\n";

  if (rm.kind == RmKind::Coupled && !rm.groups.empty()) {
    for (size_t g = 0; g < rm.groups.size(); ++g) {
      if (rm.groups[g].size() < 2) continue;
      out << "  subgraph cluster_" << g << " {\n";
      out << "    style=dashed;\n    color=red;\n";
      for (StateId m : rm.groups[g]) emit_node(out, rm, m, "    ");
      out << "  }\n";
    }
    for (StateId u = 0; u < rm.state_count(); ++u)
      if (rm.groups[rm.group_of[u]].size() < 2) emit_node(out, rm, u, "  ");
  } else {
    for (StateId u = 0; u < rm.state_count(); ++u) emit_node(out, rm, u, "  ");
  }

  out << "  init [shape=point];\n";
  out << "  init -> n" << rm.initial << ";\n";
  for (const auto& tr : rm.transitions)
    out << "  n" << tr.source << " -> n" << tr.target << " [label=\"<"
        << escape(tr.guard.to_string()) << "; " << tr.reward << ">\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace rmkit
