#include "rmkit/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rmkit/rm_text.hpp"

namespace rmkit {

namespace {

constexpr const char* kMagic = "rmkit-checkpoint";
constexpr int kVersion = 1;

std::string hex(double v) {
  std::ostringstream out;
  out << std::hexfloat << v;
  return out.str();
}

double unhex(const std::string& s) {
  try {
    return std::strtod(s.c_str(), nullptr);
  } catch (...) {
    throw CheckpointError("bad float literal: " + s);
  }
}

void expect(std::istream& in, const std::string& want) {
  std::string got;
  in >> got;
  if (got != want)
    throw CheckpointError("expected '" + want + "', found '" + got + "'");
}

std::string read_block(std::istream& in, const std::string& name) {
  expect(in, name + "-begin");
  std::string line, body;
  std::getline(in, line);  // rest of the marker line
  std::string end = name + "-end";
  while (std::getline(in, line)) {
    if (line == end) return body;
    body += line;
    body += '\n';
  }
  throw CheckpointError("unterminated block '" + name + "'");
}

}  // namespace

void CheckpointCodec::save(const Learner& learner, std::ostream& out) {
  const Hyperparams& hp = learner.hyperparams();
  out << kMagic << " " << kVersion << "\n";
  out << "algo " << to_string(learner.algo()) << "\n";
  out << "hyperparams " << hex(hp.alpha) << " " << hex(hp.epsilon) << " "
      << hex(hp.gamma) << " " << hex(hp.xi) << " " << hex(hp.q_init) << " "
      << hp.lambda << " " << hp.episode_cap << " "
      << (hp.corm_counterfactual ? 1 : 0) << " " << hex(hp.r_min) << " "
      << hex(hp.r_max) << "\n";
  out << "counters " << learner.total_steps() << " " << learner.total_updates()
      << " " << learner.peak_step_updates() << " " << learner.episodes() << " "
      << hex(learner.cumulative_reward()) << "\n";
  out << "best " << learner.reward.best_length << "\n";
  out << "rng " << learner.rng << "\n";

  out << "used " << learner.used_transitions.size();
  for (int t : learner.used_transitions) out << " " << t;
  out << "\n";

  std::vector<std::pair<int, long>> eta(learner.eta.values.begin(),
                                        learner.eta.values.end());
  std::sort(eta.begin(), eta.end());
  out << "eta " << eta.size();
  for (const auto& [u, v] : eta) out << " " << u << " " << v;
  out << "\n";

  std::vector<uint64_t> keys;
  keys.reserve(learner.q.values.size());
  for (const auto& [k, row] : learner.q.values) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  out << "q " << hex(learner.q.init_value) << " " << keys.size() << "\n";
  for (uint64_t k : keys) {
    const auto& row = learner.q.values.at(k);
    out << k;
    for (double v : row) out << " " << hex(v);
    out << "\n";
  }

  out << "map-begin\n" << serialize_map(learner.map()) << "map-end\n";
  out << "rm-begin\n" << serialize_rm(learner.machine()) << "rm-end\n";
}

Learner CheckpointCodec::load(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != kMagic) throw CheckpointError("not a checkpoint file");
  if (version != kVersion)
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));

  expect(in, "algo");
  std::string algo_name;
  in >> algo_name;

  expect(in, "hyperparams");
  Hyperparams hp;
  std::string f;
  in >> f, hp.alpha = unhex(f);
  in >> f, hp.epsilon = unhex(f);
  in >> f, hp.gamma = unhex(f);
  in >> f, hp.xi = unhex(f);
  in >> f, hp.q_init = unhex(f);
  int counterfactual = 0;
  in >> hp.lambda >> hp.episode_cap >> counterfactual;
  hp.corm_counterfactual = counterfactual != 0;
  in >> f, hp.r_min = unhex(f);
  in >> f, hp.r_max = unhex(f);

  expect(in, "counters");
  long steps = 0, updates = 0, peak = 0, episodes = 0;
  in >> steps >> updates >> peak >> episodes >> f;
  double cumulative = unhex(f);

  expect(in, "best");
  long best = kUnknownLength;
  in >> best;

  expect(in, "rng");
  std::mt19937_64 rng;
  in >> rng;

  expect(in, "used");
  size_t n = 0;
  in >> n;
  std::set<int> used;
  for (size_t i = 0; i < n; ++i) {
    int t;
    in >> t;
    used.insert(t);
  }

  expect(in, "eta");
  in >> n;
  EtaTable eta;
  for (size_t i = 0; i < n; ++i) {
    int u;
    long v;
    in >> u >> v;
    eta.values[u] = v;
  }

  expect(in, "q");
  in >> f;
  double q_init = unhex(f);
  in >> n;
  QTable q;
  q.init_value = q_init;
  for (size_t i = 0; i < n; ++i) {
    uint64_t key;
    in >> key;
    std::array<double, kNumActions> row;
    for (double& v : row) {
      in >> f;
      v = unhex(f);
    }
    q.values[key] = row;
  }
  if (!in) throw CheckpointError("truncated checkpoint");

  GridMap map = parse_map(read_block(in, "map"));
  RewardMachine rm = parse_rm(read_block(in, "rm"));

  Learner learner(parse_algo(algo_name), std::move(map), std::move(rm), hp, 0);
  learner.q = std::move(q);
  learner.eta = std::move(eta);
  learner.reward.best_length = best;
  learner.used_transitions = std::move(used);
  learner.rng = rng;
  learner.restore_counters(steps, updates, peak, episodes, cumulative);
  return learner;
}

void save_checkpoint(const Learner& learner, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  CheckpointCodec::save(learner, out);
}

Learner load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint: " + path);
  return CheckpointCodec::load(in);
}

}  // namespace rmkit
