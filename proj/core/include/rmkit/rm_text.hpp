#ifndef RMKIT_RM_TEXT_HPP
#define RMKIT_RM_TEXT_HPP

#include <iosfwd>
#include <string>

#include "rmkit/reward_machine.hpp"

namespace rmkit {

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}
};

/// Parses the textual RM format. The returned machine passes validate_rm;
/// validation violations are reported as ParseError.
///
/// Format (line oriented, `#` comments):
///   kind: boolean|numeric|agenda|coupled
///   features: s b1 b2
///   numerics: b 0..2, c 0..3
///   states: u0 u1
///   terminal: u2
///   initial: u0
///   transitions:
///     u0 -> u1 [dec(b) | done(b)] 0
///   labels:                      (agenda/coupled)
///     u0 = 0 {b1,b2} agenda
///   groups:                      (coupled)
///     u0a u0b
RewardMachine parse_rm(const std::string& text);
RewardMachine load_rm(const std::string& path);

/// Canonical serialisation; parse_rm(serialize_rm(rm)) is isomorphic to rm
/// and repeated serialisation is byte-identical.
std::string serialize_rm(const RewardMachine& rm);
void save_rm(const RewardMachine& rm, const std::string& path);

}  // namespace rmkit

#endif
