#ifndef RMKIT_EXPERIMENT_HPP
#define RMKIT_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "rmkit/learner.hpp"
#include "rmkit/oracle.hpp"

namespace rmkit {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Flat key=value experiment description. `algo` accepts qrm, crm, corm, and
/// the ablation preset corm0 (CoRM with the length window disabled).
struct ExperimentConfig {
  // Environment: either a map file or a generated delivery instance.
  std::string map_path;
  std::string domain = "delivery";
  int gen_width = 10;
  int gen_height = 10;
  int gen_objects = 2;
  uint64_t gen_seed = 0;
  int task = -1;  // office task size; -1 = all objectives

  std::string algo = "corm";
  std::string rm_variant = "coupled";  // boolean | agenda | coupled
  Hyperparams hp;
  long steps = 200000;
  long log_every = 1000;
  std::vector<uint64_t> seeds{0};
  std::string out_dir;          // empty = no CSV files
  std::string checkpoint_path;  // optional prefix, one file per seed
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct MetricsRow {
  long step = 0;
  long episode = 0;
  double avg_reward_per_step = 0.0;
  long episode_length = 0;
  bool success = false;
  long update_count = 0;
  double wall_clock = 0.0;
};

std::string metrics_header();
std::string to_csv(const MetricsRow& row);

GridMap config_map(const ExperimentConfig& cfg);
RewardMachine config_rm(const ExperimentConfig& cfg, const GridMap& map);
Learner make_learner(const ExperimentConfig& cfg, uint64_t seed);

struct RunResult {
  uint64_t seed = 0;
  std::vector<MetricsRow> rows;
  long steps_to_first_optimal = -1;  // via greedy probes at log boundaries
  long optimal_length = -1;
  bool resource_error = false;
  std::string error;
};

struct AggregateRow {
  long step = 0;
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};

struct BatchResult {
  std::vector<RunResult> runs;
  std::vector<AggregateRow> aggregate;
};

/// One learning run for one seed, probing the greedy policy at every log
/// boundary to record when it first matches the oracle length.
RunResult run_single(const ExperimentConfig& cfg, uint64_t seed);

/// Runs every configured seed, writes per-run and aggregate CSVs when
/// `out_dir` is set, and saves checkpoints when `checkpoint_path` is set.
BatchResult run_batch(const ExperimentConfig& cfg);

/// Quantile with linear interpolation over the sorted sample.
double quantile(std::vector<double> values, double q);

enum class VerifyStatus { Optimal, Suboptimal, Failed };

struct VerifyResult {
  VerifyStatus status = VerifyStatus::Failed;
  long greedy_length = 0;
  long optimal_length = -1;
};

/// Executes the greedy policy once (epsilon = 0, xi = 0) and compares its
/// episode length with the BFS oracle.
VerifyResult verify_policy(const Learner& learner, uint64_t probe_seed = 12345);

struct ScalingCell {
  std::string algo;
  int size = 0;
  long steps = 0;
  long updates = 0;
  long peak_step_updates = 0;
  double wall_clock = 0.0;
  bool failed = false;
  std::string error;
};

struct ScalingFit {
  std::string algo;
  double r2_linear = 0.0;
  double r2_exponential = 0.0;
};

struct ScalingReport {
  std::vector<ScalingCell> cells;
  std::vector<ScalingFit> fits;
};

/// Update-count and wall-clock scaling across task sizes; growth-class fits
/// are computed on the peak per-step update counts. Algorithm tokens:
/// corm (coupled), crm (Boolean RM), crm-agenda, qrm.
ScalingReport scaling_report(const std::string& domain,
                             const std::vector<int>& sizes,
                             const std::vector<std::string>& algos,
                             long step_budget, uint64_t seed = 1);

std::string scaling_to_csv(const ScalingReport& report);

}  // namespace rmkit

#endif
