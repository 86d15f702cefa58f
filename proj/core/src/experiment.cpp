#include "rmkit/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "rmkit/checkpoint.hpp"
#include "rmkit/unroll.hpp"

namespace rmkit {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double now_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

struct Fit {
  double r2 = 0.0;
};

double r_squared(const std::vector<double>& y, const std::vector<double>& yhat) {
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= (double)y.size();
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - mean) * (y[i] - mean);
  }
  return ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
}

void least_squares(const std::vector<double>& x, const std::vector<double>& y,
                   double& a, double& b) {
  double n = (double)x.size(), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  b = denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
  a = (sy - b * sx) / n;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "map") cfg.map_path = value;
      else if (key == "domain") cfg.domain = value;
      else if (key == "gen_width") cfg.gen_width = std::stoi(value);
      else if (key == "gen_height") cfg.gen_height = std::stoi(value);
      else if (key == "gen_objects") cfg.gen_objects = std::stoi(value);
      else if (key == "gen_seed") cfg.gen_seed = std::stoull(value);
      else if (key == "task") cfg.task = std::stoi(value);
      else if (key == "algo") cfg.algo = value;
      else if (key == "rm") cfg.rm_variant = value;
      else if (key == "alpha") cfg.hp.alpha = std::stod(value);
      else if (key == "epsilon") cfg.hp.epsilon = std::stod(value);
      else if (key == "gamma") cfg.hp.gamma = std::stod(value);
      else if (key == "xi") cfg.hp.xi = std::stod(value);
      else if (key == "q_init") cfg.hp.q_init = std::stod(value);
      else if (key == "lambda") cfg.hp.lambda = std::stoi(value);
      else if (key == "episode_cap") cfg.hp.episode_cap = std::stol(value);
      else if (key == "counterfactual")
        cfg.hp.corm_counterfactual = value == "1" || value == "true";
      else if (key == "steps") cfg.steps = std::stol(value);
      else if (key == "log_every") cfg.log_every = std::stol(value);
      else if (key == "out") cfg.out_dir = value;
      else if (key == "checkpoint") cfg.checkpoint_path = value;
      else if (key == "seeds") {
        cfg.seeds.clear();
        std::istringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          tok = trim(tok);
          if (!tok.empty()) cfg.seeds.push_back(std::stoull(tok));
        }
        if (cfg.seeds.empty()) throw ConfigError("empty seed list");
      } else {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("line " + std::to_string(line_no) + ": bad value '" +
                        value + "' for key '" + key + "'");
    }
  }
  if (cfg.algo == "corm0") {
    cfg.algo = "corm";
    cfg.hp.lambda = -1;
  }
  if (cfg.algo == "corm" && cfg.rm_variant != "coupled")
    throw ConfigError("corm requires rm = coupled");
  if (cfg.algo != "corm" && cfg.rm_variant == "coupled")
    throw ConfigError("rm = coupled requires algo = corm");
  if (cfg.log_every <= 0) throw ConfigError("log_every must be positive");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string metrics_header() {
  return "step,episode,avg_reward_per_step,episode_length,success,"
         "update_count,wall_clock";
}

std::string to_csv(const MetricsRow& row) {
  std::ostringstream out;
  out << row.step << "," << row.episode << "," << row.avg_reward_per_step
      << "," << row.episode_length << "," << (row.success ? 1 : 0) << ","
      << row.update_count << "," << row.wall_clock;
  return out.str();
}

GridMap config_map(const ExperimentConfig& cfg) {
  if (!cfg.map_path.empty()) {
    GridMap map = load_map(cfg.map_path);
    if (cfg.task >= 0) map.task_objectives = cfg.task;
    return map;
  }
  if (cfg.domain == "delivery")
    return delivery_random_map(cfg.gen_width, cfg.gen_height, cfg.gen_objects,
                               cfg.gen_seed);
  if (cfg.domain == "office") return office_example_map(std::max(cfg.task, 1));
  throw ConfigError("unknown domain '" + cfg.domain + "'");
}

RewardMachine config_rm(const ExperimentConfig& cfg, const GridMap& map) {
  RewardMachine numeric = task_numeric_rm(map);
  SubtaskBindings bindings = feature_catalog(map).bindings;
  if (cfg.rm_variant == "boolean") return unroll_to_boolean(numeric, bindings);
  if (cfg.rm_variant == "agenda") return unroll_to_agenda(numeric, bindings);
  if (cfg.rm_variant == "coupled")
    return split_to_coupled(unroll_to_agenda(numeric, bindings));
  throw ConfigError("unknown rm variant '" + cfg.rm_variant + "'");
}

Learner make_learner(const ExperimentConfig& cfg, uint64_t seed) {
  GridMap map = config_map(cfg);
  RewardMachine rm = config_rm(cfg, map);
  return Learner(parse_algo(cfg.algo), std::move(map), std::move(rm), cfg.hp,
                 seed);
}

RunResult run_single(const ExperimentConfig& cfg, uint64_t seed) {
  RunResult result;
  result.seed = seed;
  auto started = std::chrono::steady_clock::now();
  try {
    Learner learner = make_learner(cfg, seed);
    result.optimal_length =
        bfs_optimal_length(learner.map(), learner.machine());
    long next_boundary = cfg.log_every;
    EpisodeRecord last;
    while (learner.total_steps() < cfg.steps) {
      last = learner.run_episode(cfg.steps - learner.total_steps());
      while (next_boundary <= learner.total_steps()) {
        MetricsRow row;
        row.step = next_boundary;
        row.episode = learner.episodes();
        row.avg_reward_per_step =
            learner.cumulative_reward() / (double)learner.total_steps();
        row.episode_length = last.length;
        row.success = last.success;
        row.update_count = learner.total_updates();
        row.wall_clock = now_seconds(started);
        result.rows.push_back(row);

        if (result.steps_to_first_optimal < 0 && result.optimal_length > 0) {
          std::mt19937_64 probe(0x9e3779b97f4a7c15ull ^ (uint64_t)next_boundary);
          EpisodeRecord greedy = learner.greedy_episode(probe);
          if (greedy.success && greedy.length == result.optimal_length)
            result.steps_to_first_optimal = next_boundary;
        }
        next_boundary += cfg.log_every;
      }
    }
    if (!cfg.checkpoint_path.empty()) {
      std::filesystem::path target(cfg.checkpoint_path + ".seed" +
                                   std::to_string(seed) + ".ckpt");
      if (target.has_parent_path())
        std::filesystem::create_directories(target.parent_path());
      save_checkpoint(learner, target.string());
    }
  } catch (const SearchBudgetError& e) {
    result.resource_error = true;
    result.error = e.what();
  } catch (const std::bad_alloc&) {
    result.resource_error = true;
    result.error = "out of memory";
  }
  return result;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  double pos = q * (double)(values.size() - 1);
  size_t lo = (size_t)pos;
  size_t hi = std::min(lo + 1, values.size() - 1);
  double frac = pos - (double)lo;
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

BatchResult run_batch(const ExperimentConfig& cfg) {
  BatchResult batch;
  for (uint64_t seed : cfg.seeds) batch.runs.push_back(run_single(cfg, seed));

  std::map<long, std::vector<double>> by_step;
  for (const auto& run : batch.runs)
    for (const auto& row : run.rows)
      by_step[row.step].push_back(row.avg_reward_per_step);
  for (const auto& [step, values] : by_step) {
    if (values.size() != cfg.seeds.size()) continue;  // incomplete runs
    AggregateRow agg;
    agg.step = step;
    agg.median = quantile(values, 0.5);
    agg.p25 = quantile(values, 0.25);
    agg.p75 = quantile(values, 0.75);
    batch.aggregate.push_back(agg);
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    for (const auto& run : batch.runs) {
      std::ofstream out(cfg.out_dir + "/run_seed" + std::to_string(run.seed) +
                        ".csv");
      out << metrics_header() << "\n";
      for (const auto& row : run.rows) out << to_csv(row) << "\n";
    }
    std::ofstream out(cfg.out_dir + "/aggregate.csv");
    out << "step,median,p25,p75\n";
    for (const auto& agg : batch.aggregate)
      out << agg.step << "," << agg.median << "," << agg.p25 << "," << agg.p75
          << "\n";
  }
  return batch;
}

VerifyResult verify_policy(const Learner& learner, uint64_t probe_seed) {
  VerifyResult result;
  result.optimal_length = bfs_optimal_length(learner.map(), learner.machine());
  std::mt19937_64 probe(probe_seed);
  EpisodeRecord rec = learner.greedy_episode(probe);
  result.greedy_length = rec.length;
  if (!rec.success)
    result.status = VerifyStatus::Failed;
  else if (rec.length == result.optimal_length)
    result.status = VerifyStatus::Optimal;
  else
    result.status = VerifyStatus::Suboptimal;
  return result;
}

ScalingReport scaling_report(const std::string& domain,
                             const std::vector<int>& sizes,
                             const std::vector<std::string>& algos,
                             long step_budget, uint64_t seed) {
  ScalingReport report;
  for (const auto& algo : algos) {
    std::vector<double> xs, ys;
    for (int size : sizes) {
      ScalingCell cell;
      cell.algo = algo;
      cell.size = size;
      auto started = std::chrono::steady_clock::now();
      try {
        ExperimentConfig cfg;
        cfg.domain = domain;
        cfg.steps = step_budget;
        if (domain == "delivery") {
          int side = std::max(4, (int)std::ceil(std::sqrt(size + 2.0)) + 2);
          cfg.gen_width = side;
          cfg.gen_height = side;
          cfg.gen_objects = size;
          cfg.gen_seed = seed;
        } else {
          cfg.task = size;
        }
        if (algo == "corm") {
          cfg.algo = "corm";
          cfg.rm_variant = "coupled";
        } else if (algo == "crm" || algo == "crm-boolean") {
          cfg.algo = "crm";
          cfg.rm_variant = "boolean";
        } else if (algo == "crm-agenda") {
          cfg.algo = "crm";
          cfg.rm_variant = "agenda";
        } else if (algo == "qrm") {
          cfg.algo = "qrm";
          cfg.rm_variant = "boolean";
        } else {
          throw ConfigError("unknown scaling algorithm '" + algo + "'");
        }
        Learner learner = make_learner(cfg, seed);
        while (learner.total_steps() < step_budget)
          learner.run_episode(step_budget - learner.total_steps());
        cell.steps = learner.total_steps();
        cell.updates = learner.total_updates();
        cell.peak_step_updates = learner.peak_step_updates();
        cell.wall_clock = now_seconds(started);
        xs.push_back((double)size);
        ys.push_back((double)cell.peak_step_updates);
      } catch (const std::exception& e) {
        cell.failed = true;
        cell.error = e.what();
      }
      report.cells.push_back(cell);
    }
    if (xs.size() >= 3) {
      ScalingFit fit;
      fit.algo = algo;
      double a, b;
      least_squares(xs, ys, a, b);
      std::vector<double> lin_hat;
      for (double x : xs) lin_hat.push_back(a + b * x);
      fit.r2_linear = r_squared(ys, lin_hat);
      std::vector<double> logy;
      for (double y : ys) logy.push_back(std::log(std::max(y, 1.0)));
      least_squares(xs, logy, a, b);
      std::vector<double> exp_hat;
      for (double x : xs) exp_hat.push_back(std::exp(a + b * x));
      fit.r2_exponential = r_squared(ys, exp_hat);
      report.fits.push_back(fit);
    }
  }
  return report;
}

std::string scaling_to_csv(const ScalingReport& report) {
  std::ostringstream out;
  out << "algo,size,steps,updates,peak_step_updates,wall_clock,error\n";
  for (const auto& c : report.cells)
    out << c.algo << "," << c.size << "," << c.steps << "," << c.updates << ","
        << c.peak_step_updates << "," << c.wall_clock << ","
        << (c.failed ? c.error : "") << "\n";
  out << "\nalgo,r2_linear,r2_exponential\n";
  for (const auto& f : report.fits)
    out << f.algo << "," << f.r2_linear << "," << f.r2_exponential << "\n";
  return out.str();
}

}  // namespace rmkit
