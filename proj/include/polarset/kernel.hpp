#pragma once

#include "polarset/types.hpp"

#include <array>
#include <functional>
#include <string>
#include <variant>

namespace polarset {

// Kernel families. Every built-in family is radial: G(x, y) = g(|x - y|) with
// g decreasing and g(0) = +inf.

/// G(x, y) = |x - y|^(alpha - N), 0 < alpha < N.
struct RieszFamily {
  double alpha = 2.0;
  int dimension = 3;
};

/// G(x, y) = |x - y|^(-gamma).
struct MetricPowerFamily {};

/// G(x, y) = log(2 / |x - y|), valid on sets of diameter at most 1/2.
struct Log2dFamily {};

/// G(x, y) = g(|x - y|) for a user-supplied decreasing profile g with g(0) = inf.
struct CustomFamily {
  std::string name;
  std::function<double(double)> profile;
};

using KernelFamily = std::variant<RieszFamily, MetricPowerFamily, Log2dFamily, CustomFamily>;

struct KernelSpec {
  KernelFamily family = MetricPowerFamily{};
  double gamma = 1.0;  // comparability exponent
  double cap = 1e6;    // finite stand-in for G(x, x) in linear programs and truncated potentials

  static KernelSpec riesz(double alpha, int dimension, double cap = 1e6);
  static KernelSpec metric_power(double gamma, double cap = 1e6);
  static KernelSpec log2d(double gamma = 1.0, double cap = 1e6);
  static KernelSpec custom(std::string name, std::function<double(double)> profile, double gamma,
                           double cap = 1e6);

  /// g(r); +inf at r <= kMergeTolerance.
  double profile(double r) const;

  std::string name() const;

  /// Throws InputError when the parameters violate the family's constraints.
  void validate() const;
};

/// Extended value G(x, y); +inf when x and y coincide.
double eval_kernel(const KernelSpec& k, const Point& x, const Point& y);

/// min(G(x, y), cap). This is the coefficient used by the capacity LP.
double truncated_kernel(const KernelSpec& k, const Point& x, const Point& y);

/// rho(x, y) = 1/G(x, y) + 1/G(y, x). Zero exactly on the diagonal.
double quasimetric(const KernelSpec& k, const Point& x, const Point& y);

/// Dense kernel matrix K(i, j) = G(rows[i], cols[j]), optionally truncated at the cap.
Eigen::MatrixXd kernel_matrix(const KernelSpec& k, std::span<const Point> rows,
                              std::span<const Point> cols, bool truncated);

struct TriangleReport {
  double constant_C = 1.0;
  std::array<std::size_t, 3> worst_triple{0, 0, 0};  // indices (x, y, z) into the cloud
  double gamma_min = 0.0;                            // 2 log2(constant_C)
};

/// Exhaustive scan of ordered triples of distinct cloud points for
/// max (G(x,z) ^ G(y,z)) / G(x,y). The constant is certified on the cloud only.
TriangleReport triangle_constant(const KernelSpec& k, const PointCloud& cloud);

struct DistanceTable {
  Eigen::MatrixXd rho;  // quasi-metric
  Eigen::MatrixXd d;    // chain metric
  double gamma = 1.0;
  bool below_gamma_min = false;
};

/// Chain metric on the cloud: all-pairs shortest paths over edge weights rho^(1/gamma).
/// gamma below 2 log2 C is allowed but flagged in the result.
DistanceTable chain_metric(const KernelSpec& k, const PointCloud& cloud, double gamma);

/// Smallest C' >= 1 with C'^-1 d^-gamma <= G <= C' d^-gamma over all distinct pairs.
double comparability_check(const KernelSpec& k, const PointCloud& cloud, const Eigen::MatrixXd& d,
                           double gamma);

/// Worst relative violation of d(x,z) <= d(x,y) + d(y,z) over all triples; <= 0 means none.
double max_triangle_violation(const Eigen::MatrixXd& d);

}  // namespace polarset
