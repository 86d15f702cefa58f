#ifndef RMKIT_CHECKPOINT_HPP
#define RMKIT_CHECKPOINT_HPP

#include <iosfwd>
#include <string>

#include "rmkit/learner.hpp"

namespace rmkit {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Versioned text snapshot of a learner taken at an episode boundary: the
/// algorithm, hyperparameters, map, reward machine, Q/eta tables (doubles in
/// hexfloat), K_best, used transitions, RNG state, and run counters.
/// Reloading resumes bit-identical trajectories.
struct CheckpointCodec {
  static void save(const Learner& learner, std::ostream& out);
  static Learner load(std::istream& in);
};

void save_checkpoint(const Learner& learner, const std::string& path);
Learner load_checkpoint(const std::string& path);

}  // namespace rmkit

#endif
