#include "polarset/report.hpp"

#include <algorithm>
#include <cmath>

namespace polarset {

Check check_ge(std::string name, double value, double bound) {
  return {std::move(name), ">=", value, bound, value >= bound};
}

Check check_gt(std::string name, double value, double bound) {
  return {std::move(name), ">", value, bound, value > bound};
}

Check check_le(std::string name, double value, double bound) {
  return {std::move(name), "<=", value, bound, value <= bound};
}

Check check_lt(std::string name, double value, double bound) {
  return {std::move(name), "<", value, bound, value < bound};
}

Check check_close(std::string name, double value, double bound, double tol) {
  const bool ok = std::abs(value - bound) <= tol * std::max(1.0, std::abs(bound));
  return {std::move(name), "==", value, bound, ok};
}

Check check_true(std::string name, bool holds) { return {std::move(name), "==", holds ? 1.0 : 0.0, 1.0, holds}; }

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

}  // namespace polarset
