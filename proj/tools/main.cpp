#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rmkit/checkpoint.hpp"
#include "rmkit/dot.hpp"
#include "rmkit/experiment.hpp"
#include "rmkit/grid.hpp"
#include "rmkit/rm_text.hpp"
#include "rmkit/unroll.hpp"

namespace {

rmkit::SubtaskBindings load_bindings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bindings file: " + path);
  rmkit::SubtaskBindings bindings;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string var, eq, tok;
    if (!(ls >> var)) continue;
    if (!(ls >> eq) || eq != "=")
      throw std::runtime_error("bindings line " + std::to_string(line_no) +
                               ": expected 'variable = subtask...'");
    auto& list = bindings[var];
    while (ls >> tok) list.push_back(tok);
  }
  return bindings;
}

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> sizes;
  if (auto dots = text.find(".."); dots != std::string::npos) {
    int lo = std::stoi(text.substr(0, dots));
    int hi = std::stoi(text.substr(dots + 2));
    for (int n = lo; n <= hi; ++n) sizes.push_back(n);
  } else {
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
  }
  if (sizes.empty()) throw std::runtime_error("empty size list");
  return sizes;
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

int cmd_compile(const std::string& in_path, const std::string& to,
                const std::string& bindings_path, const std::string& out_path,
                const std::string& dot_path) {
  rmkit::RewardMachine machine = rmkit::load_rm(in_path);
  if (to != "none") {
    rmkit::SubtaskBindings bindings;
    if (!bindings_path.empty()) bindings = load_bindings(bindings_path);
    if (to == "boolean")
      machine = rmkit::unroll_to_boolean(machine, bindings);
    else if (to == "agenda")
      machine = rmkit::unroll_to_agenda(machine, bindings);
    else if (to == "coupled")
      machine =
          rmkit::split_to_coupled(rmkit::unroll_to_agenda(machine, bindings));
    else
      throw std::runtime_error("unknown target '" + to + "'");
  }
  write_or_print(out_path, rmkit::serialize_rm(machine));
  if (!dot_path.empty()) write_or_print(dot_path, rmkit::export_dot(machine));
  return 0;
}

int cmd_verify_rm(const std::string& in_path) {
  rmkit::RewardMachine machine = rmkit::load_rm(in_path);
  auto violations = rmkit::validate_rm(machine);
  if (violations.empty()) {
    std::cout << "ok: " << machine.state_count() << " states, "
              << machine.transitions.size() << " transitions\n";
    return 0;
  }
  for (const auto& v : violations) std::cout << "violation: " << v.detail << "\n";
  return 1;
}

int cmd_verify_checkpoint(const std::string& path) {
  rmkit::Learner learner = rmkit::load_checkpoint(path);
  auto result = rmkit::verify_policy(learner);
  switch (result.status) {
    case rmkit::VerifyStatus::Optimal:
      std::cout << "optimal (length " << result.greedy_length << ")\n";
      return 0;
    case rmkit::VerifyStatus::Suboptimal:
      std::cout << "suboptimal (length " << result.greedy_length
                << ", optimal " << result.optimal_length << ")\n";
      return 1;
    case rmkit::VerifyStatus::Failed:
      std::cout << "failed (no goal within " << result.greedy_length
                << " steps)\n";
      return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward-machine toolkit: translation, environments, learning"};
  app.require_subcommand(1);

  std::string in_path, to = "none", bindings_path, out_path, dot_path;
  auto* compile = app.add_subcommand(
      "compile", "Parse a reward machine and optionally translate it");
  compile->add_option("--in", in_path, "input machine file")->required();
  compile->add_option("--to", to, "boolean | agenda | coupled");
  compile->add_option("--bindings", bindings_path,
                      "numeric-variable to subtask bindings file");
  compile->add_option("--out", out_path, "output file (default stdout)");
  compile->add_option("--dot", dot_path, "also write a Graphviz rendering");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run a seeded experiment batch");
  run->add_option("--config", config_path, "key=value config file")->required();

  std::string checkpoint_path, verify_rm_path;
  auto* verify =
      app.add_subcommand("verify", "Check a machine or a trained policy");
  verify->add_option("--checkpoint", checkpoint_path,
                     "learner checkpoint to test against the oracle");
  verify->add_option("--rm", verify_rm_path, "machine file to validate");

  std::string domain = "delivery", sizes_text = "2..5", algos_text = "corm,crm";
  long scale_steps = 3000;
  std::string scale_out;
  auto* scale = app.add_subcommand("scale", "Update-count scaling report");
  scale->add_option("--domain", domain, "delivery | office");
  scale->add_option("--sizes", sizes_text, "e.g. 2..8 or 2,4,6");
  scale->add_option("--algos", algos_text, "corm,crm,crm-agenda,qrm");
  scale->add_option("--steps", scale_steps, "step budget per cell");
  scale->add_option("--out", scale_out, "CSV output file (default stdout)");

  auto* env = app.add_subcommand("env", "Environment utilities");
  std::string map_path;
  auto* env_show = env->add_subcommand("show", "Render a map file");
  env_show->add_option("--map", map_path, "map file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed())
      return cmd_compile(in_path, to, bindings_path, out_path, dot_path);
    if (run->parsed()) {
      auto cfg = rmkit::load_config(config_path);
      auto batch = rmkit::run_batch(cfg);
      for (const auto& r : batch.runs) {
        std::cout << "seed " << r.seed << ": ";
        if (r.resource_error)
          std::cout << "resource error: " << r.error << "\n";
        else if (r.steps_to_first_optimal >= 0)
          std::cout << "first optimal at step " << r.steps_to_first_optimal
                    << "\n";
        else
          std::cout << "no optimal policy within " << cfg.steps << " steps\n";
      }
      if (!cfg.out_dir.empty())
        std::cout << "metrics written to " << cfg.out_dir << "\n";
      return 0;
    }
    if (verify->parsed()) {
      if (!verify_rm_path.empty()) return cmd_verify_rm(verify_rm_path);
      if (!checkpoint_path.empty())
        return cmd_verify_checkpoint(checkpoint_path);
      std::cerr << "verify needs --rm or --checkpoint\n";
      return 2;
    }
    if (scale->parsed()) {
      auto report = rmkit::scaling_report(domain, parse_sizes(sizes_text),
                                          split_csv(algos_text), scale_steps);
      write_or_print(scale_out, rmkit::scaling_to_csv(report));
      return 0;
    }
    if (env_show->parsed()) {
      std::cout << rmkit::render_map(rmkit::load_map(map_path));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
