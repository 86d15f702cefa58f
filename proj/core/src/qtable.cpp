#include "rmkit/qtable.hpp"

#include <cmath>
#include <stdexcept>

namespace rmkit {

std::array<double, kNumActions>& QTable::row(uint64_t key) {
  auto it = values.find(key);
  if (it == values.end()) {
    std::array<double, kNumActions> fresh;
    fresh.fill(init_value);
    it = values.emplace(key, fresh).first;
  }
  return it->second;
}

double QTable::value(uint64_t key, int action) const {
  auto it = values.find(key);
  return it == values.end() ? init_value : it->second[action];
}

double QTable::max_value(uint64_t key) const {
  auto it = values.find(key);
  if (it == values.end()) return init_value;
  double best = it->second[0];
  for (int a = 1; a < kNumActions; ++a) best = std::max(best, it->second[a]);
  return best;
}

int QTable::greedy_action(uint64_t key, std::mt19937_64& rng) const {
  double vals[kNumActions];
  auto it = values.find(key);
  for (int a = 0; a < kNumActions; ++a)
    vals[a] = it == values.end() ? init_value : it->second[a];
  double best = vals[0];
  for (int a = 1; a < kNumActions; ++a) best = std::max(best, vals[a]);
  int ties[kNumActions];
  int n = 0;
  for (int a = 0; a < kNumActions; ++a)
    if (vals[a] == best) ties[n++] = a;
  if (n == 1) return ties[0];
  std::uniform_int_distribution<int> pick(0, n - 1);
  return ties[pick(rng)];
}

void QTable::update(uint64_t key, int action, double target, double alpha) {
  double& q = row(key)[action];
  q += alpha * (target - q);
}

std::optional<long> EtaTable::get(int rm_state) const {
  auto it = values.find(rm_state);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

void EtaTable::observe(int rm_state, long steps) {
  auto it = values.find(rm_state);
  if (it == values.end() || steps < it->second) values[rm_state] = steps;
}

double final_reward(long K, long K_x, const RewardParams& p) {
  if (p.window < -1)
    throw std::invalid_argument("final-reward window must be >= -1");
  if (p.window == -1) return 1.0;
  long delta = p.best_length == kUnknownLength ? 0 : K - p.best_length;
  if (delta <= 0) return 1.0;
  double tail =
      std::pow(p.gamma, 1.0 - (double)K_x) / (1.0 - p.gamma) * (p.r_max - p.r_min);
  long exponent = delta < p.window ? delta + 1 : p.window + 1;
  return std::pow(p.gamma, (double)exponent) + tail;
}

}  // namespace rmkit
