#pragma once

#include "polarset/measures.hpp"
#include "polarset/simplex.hpp"

namespace polarset {

struct CapacityEstimate {
  double value = 0.0;                // mass of optimal_measure
  DiscreteMeasure optimal_measure;   // on the support sites
  double constraint_gap = 0.0;       // min over targets of (truncated) Gmu - 1
  double dual_value = 0.0;           // objective of the dual LP; equals value at optimum
  Eigen::VectorXd constraint_values; // truncated Gmu at each target, in target order
  int iterations = 0;
};

/// min sum w_j s.t. sum_j w_j min(G(x_i, y_j), cap) >= 1, w >= 0.
/// Solved through its dual (max 1'u s.t. K'u <= 1, u >= 0), whose slack duals
/// are the optimal weights.
CapacityEstimate capacity_lp(const KernelSpec& k, std::span<const Point> target, std::span<const Point> support,
                             const SimplexOptions& opts = {});

/// T * optimal measure: mass T * value, truncated potential >= T (1 - tol) on the target.
DiscreteMeasure witness_from_capacity(const CapacityEstimate& est, double T);
DiscreteMeasure witness_from_capacity(const KernelSpec& k, std::span<const Point> target,
                                      std::span<const Point> support, double T);

struct SeriesLevel {
  int n = 0;
  double mass = 0.0;    // n * capacity
  double budget = 0.0;  // 2^-n
};

struct NullSeries {
  DiscreteMeasure measure;  // sum_{n <= M} mu_n with mu_n = n * optimal measure
  double capacity = 0.0;
  std::vector<SeriesLevel> levels;
  double target_min = 0.0;  // min truncated potential over the target
};

/// mu^(M) = sum_{n=1..M} mu_n, mu_n the level-n witness (T = n) with mass < 2^-n.
/// Truncated potential >= M(M+1)/2 (1 - tol) >= M on the target.
/// Throws BudgetError naming the first level whose mass reaches 2^-n.
NullSeries null_capacity_series(const KernelSpec& k, std::span<const Point> target, std::span<const Point> support,
                                int depth, const SimplexOptions& opts = {});
NullSeries null_capacity_series(const KernelSpec& k, std::span<const Point> target, const CapacityEstimate& est,
                                int depth);

}  // namespace polarset
