#pragma once

#include "polarset/types.hpp"

#include <sstream>

namespace polarset {

struct SimplexStep {
  int iteration = 0;
  Eigen::Index entering = -1;
  Eigen::Index leaving = -1;  // basic variable leaving
  double objective = 0.0;
};

template <class Scalar>
struct SimplexResult {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vector x;      // primal solution
  Vector duals;  // one per constraint row, >= 0
  Scalar objective{0};
  int iterations = 0;
  std::vector<SimplexStep> trace;  // the most recent steps
};

struct SimplexOptions {
  int max_iterations = 0;  // 0 = 50 (m + n) + 1000
  double tolerance = 1e-12;
  std::size_t trace_length = 64;
};

/// max c'x s.t. A x <= b, x >= 0, with b >= 0 (the origin is feasible, so no
/// first phase). Dense tableau, Bland's rule. Throws BudgetError when the
/// problem is unbounded or the iteration limit is hit; the message carries the
/// tail of the pivot trace.
template <class Scalar>
SimplexResult<Scalar> simplex_maximize(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b,
                                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c,
                                       const SimplexOptions& opts = {}) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  if (b.size() != m || c.size() != n) throw InputError("simplex: inconsistent dimensions");
  if ((b.array() < Scalar(0)).any()) throw InputError("simplex: right-hand side must be >= 0");

  // Row 0..m-1: [A | I | b]; row m: objective row [-c | 0 | 0].
  // Invariant: tableau(m, j) is the reduced cost of column j, tableau(m, last) the objective.
  const Eigen::Index cols = n + m + 1;
  Matrix t = Matrix::Zero(m + 1, cols);
  t.topLeftCorner(m, n) = A;
  t.block(0, n, m, m).setIdentity();
  t.topRightCorner(m, 1) = b;
  t.bottomLeftCorner(1, n) = -c.transpose();

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  const Scalar tol(opts.tolerance);
  const int limit = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(50 * (m + n) + 1000);

  SimplexResult<Scalar> result;
  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os << "simplex: " << why << " after " << result.iterations << " iterations; last pivots:";
    for (const auto& s : result.trace) {
      os << " [" << s.iteration << ": in " << s.entering << ", out " << s.leaving << ", obj " << s.objective
         << "]";
    }
    throw BudgetError(os.str());
  };

  while (true) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;
    if (result.iterations >= limit) fail("iteration limit reached");

    Eigen::Index row = -1;
    Scalar best_ratio(0);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Scalar a = t(i, enter);
      if (a <= tol) continue;
      const Scalar ratio = t(i, cols - 1) / a;
      if (row < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(row)])) {
        row = i;
        best_ratio = ratio;
      }
    }
    if (row < 0) fail("objective unbounded");

    t.row(row) /= t(row, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == row) continue;
      const Scalar f = t(i, enter);
      if (f != Scalar(0)) t.row(i) -= f * t.row(row);
    }
    const Eigen::Index leaving = basis[static_cast<std::size_t>(row)];
    basis[static_cast<std::size_t>(row)] = enter;
    ++result.iterations;
    result.trace.push_back({result.iterations, enter, leaving, static_cast<double>(t(m, cols - 1))});
    if (result.trace.size() > opts.trace_length) result.trace.erase(result.trace.begin());
  }

  result.x = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index j = basis[static_cast<std::size_t>(i)];
    if (j < n) result.x[j] = t(i, cols - 1);
  }
  result.duals = t.block(m, n, 1, m).transpose();
  result.objective = t(m, cols - 1);
  return result;
}

}  // namespace polarset
