#ifndef RMKIT_GUARD_HPP
#define RMKIT_GUARD_HPP

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "rmkit/features.hpp"

namespace rmkit {

struct SpecificationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Boolean expression tree over feature atoms. Atoms are either boolean
/// feature literals (possibly negated) or qualitative tests on a numeric
/// feature. Text form: `b1`, `!s`, `dec(b)`, `done(b)`, `live(b)`, combined
/// with `&`, `|` and parentheses.
class Guard {
 public:
  enum class Kind { True, BoolAtom, NumericAtom, And, Or };

  Guard() : kind_(Kind::True) {}

  static Guard truth() { return Guard(); }
  static Guard boolean(std::string name, bool negated = false);
  static Guard numeric(std::string var, NumericFeatureValue test);
  static Guard conj(std::vector<Guard> children);
  static Guard disj(std::vector<Guard> children);

  Kind kind() const { return kind_; }
  const std::string& atom_name() const { return name_; }
  bool negated() const { return negated_; }
  NumericFeatureValue numeric_test() const { return test_; }
  const std::vector<Guard>& children() const { return children_; }

  bool eval(const TruthAssignment& t) const;

  /// Names of boolean features referenced anywhere in the expression.
  std::set<std::string> boolean_atoms() const;
  /// Names of numeric variables referenced anywhere in the expression.
  std::set<std::string> numeric_atoms() const;
  /// Numeric variables tested for Decreased or AtBound (consuming tests).
  std::set<std::string> consuming_numeric_atoms() const;
  /// Boolean features that appear as non-negated literals.
  std::set<std::string> positive_boolean_atoms() const;

  std::string to_string() const;

  bool operator==(const Guard& other) const {
    return to_string() == other.to_string();
  }

 private:
  Kind kind_;
  std::string name_;
  bool negated_ = false;
  NumericFeatureValue test_ = NumericFeatureValue::NoProgress;
  std::vector<Guard> children_;

  void collect_bool(std::set<std::string>& out) const;
  void collect_numeric(std::set<std::string>& out, bool consuming_only) const;
  void collect_positive(std::set<std::string>& out) const;
  std::string render(bool parenthesise) const;
};

/// Parses the guard grammar used in RM text files. Throws SpecificationError
/// on malformed input.
Guard parse_guard(const std::string& text);

inline bool eval_guard(const Guard& g, const TruthAssignment& t) {
  return g.eval(t);
}

}  // namespace rmkit

#endif
