#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace polarset {

using Point = Eigen::VectorXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Points closer than this are the same point (atom merging, kernel diagonal).
inline constexpr double kMergeTolerance = 1e-12;

/// Malformed input or violated precondition. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction ran out of mass budget, refinement depth or LP iterations.
/// The CLI maps this to exit code 3.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double distance(const Point& x, const Point& y) { return (x - y).norm(); }

inline bool same_point(const Point& x, const Point& y) {
  return x.size() == y.size() && distance(x, y) <= kMergeTolerance;
}

inline Point point1(double x) {
  Point p(1);
  p << x;
  return p;
}

inline Point point2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

inline Point point3(double x, double y, double z) {
  Point p(3);
  p << x, y, z;
  return p;
}

/// Strict lexicographic order on coordinates; used wherever a deterministic
/// point order is needed.
inline bool lex_less(const Point& a, const Point& b) {
  const auto n = std::min(a.size(), b.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return a.size() < b.size();
}

/// A finite sample of the ambient space with pairwise distinct points.
struct PointCloud {
  std::vector<Point> points;

  std::size_t size() const { return points.size(); }
  Eigen::Index dimension() const { return points.empty() ? 0 : points.front().size(); }

  /// Throws InputError on mixed dimensions, non-finite coordinates or duplicates.
  void validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].size() != dimension()) throw InputError("point cloud: mixed dimensions");
      if (!points[i].allFinite()) throw InputError("point cloud: non-finite coordinate");
      for (std::size_t j = 0; j < i; ++j) {
        if (same_point(points[i], points[j])) {
          throw InputError("point cloud: duplicate points at indices " + std::to_string(j) + " and " +
                           std::to_string(i));
        }
      }
    }
  }
};

}  // namespace polarset
