#pragma once

#include <string>
#include <vector>

namespace polarset {

/// One certified inequality "value relation bound" with its outcome.
struct Check {
  std::string name;
  std::string relation;  // one of ">=", ">", "<=", "<", "=="
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

Check check_ge(std::string name, double value, double bound);
Check check_gt(std::string name, double value, double bound);
Check check_le(std::string name, double value, double bound);
Check check_lt(std::string name, double value, double bound);
/// |value - bound| <= tol * max(1, |bound|).
Check check_close(std::string name, double value, double bound, double tol);
/// Boolean fact (value 1 = holds).
Check check_true(std::string name, bool holds);

bool all_pass(const std::vector<Check>& checks);

}  // namespace polarset
