#include "rmkit/features.hpp"

namespace rmkit {

std::string to_string(NumericFeatureValue v) {
  switch (v) {
    case NumericFeatureValue::Decreased:
      return "dec";
    case NumericFeatureValue::AtBound:
      return "done";
    case NumericFeatureValue::NoProgress:
      return "live";
  }
  return "?";
}

NumericFeatureValue eval_numeric_feature(int prev, int curr, int lower_bound) {
  if (curr < lower_bound)
    throw DomainViolation("numeric value " + std::to_string(curr) +
                          " below lower bound " + std::to_string(lower_bound));
  if (prev > curr && curr > lower_bound) return NumericFeatureValue::Decreased;
  if (curr == lower_bound) return NumericFeatureValue::AtBound;
  return NumericFeatureValue::NoProgress;
}

NumericFeatureValue eval_numeric_feature(const NumericVariable& var, int prev,
                                         int curr) {
  if (!var.contains(prev) || !var.contains(curr))
    throw DomainViolation("value outside domain of variable " + var.name);
  return eval_numeric_feature(prev, curr, var.lower_bound);
}

bool TruthAssignment::boolean(const std::string& name) const {
  auto it = booleans.find(name);
  if (it == booleans.end())
    throw std::out_of_range("undeclared boolean feature: " + name);
  return it->second;
}

NumericFeatureValue TruthAssignment::numeric(const std::string& name) const {
  auto it = numerics.find(name);
  if (it == numerics.end())
    throw std::out_of_range("undeclared numeric feature: " + name);
  return it->second;
}

}  // namespace rmkit
