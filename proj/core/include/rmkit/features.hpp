#ifndef RMKIT_FEATURES_HPP
#define RMKIT_FEATURES_HPP

#include <map>
#include <stdexcept>
#include <string>

namespace rmkit {

/// Qualitative change category of a discrete, lower-bounded numeric variable
/// between two consecutive observations.
enum class NumericFeatureValue {
  Decreased,   ///< value dropped but is still above the bound
  AtBound,     ///< value sits at its lower bound (goal reached)
  NoProgress,  ///< value neither decreased nor reached the bound
};

std::string to_string(NumericFeatureValue v);

/// A discrete numeric variable with a finite consecutive-integer domain
/// [lower_bound, upper_bound]. The lower bound is the goal value.
struct NumericVariable {
  std::string name;
  int lower_bound = 0;
  int upper_bound = 0;

  bool contains(int v) const { return v >= lower_bound && v <= upper_bound; }
  int domain_size() const { return upper_bound - lower_bound + 1; }
};

struct DomainViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Classifies the change of a numeric variable from prev to curr, given the
/// variable's lower bound. Both values must lie in the declared domain.
NumericFeatureValue eval_numeric_feature(int prev, int curr, int lower_bound);

/// Overload checking against a declared variable domain.
NumericFeatureValue eval_numeric_feature(const NumericVariable& var, int prev,
                                         int curr);

/// Truth values for every declared feature at one environment step.
struct TruthAssignment {
  std::map<std::string, bool> booleans;
  std::map<std::string, NumericFeatureValue> numerics;

  bool boolean(const std::string& name) const;
  NumericFeatureValue numeric(const std::string& name) const;
};

}  // namespace rmkit

#endif
