#include "polarset/capacity.hpp"

#include <sstream>

namespace polarset {

CapacityEstimate capacity_lp(const KernelSpec& k, std::span<const Point> target, std::span<const Point> support,
                             const SimplexOptions& opts) {
  if (target.empty() || support.empty()) throw InputError("capacity_lp: target and support must be nonempty");
  const Eigen::MatrixXd K = kernel_matrix(k, target, support, true);  // targets x sites
  const auto m = K.rows();
  const auto n = K.cols();

  const auto lp = simplex_maximize<double>(K.transpose(), Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(m), opts);

  CapacityEstimate est;
  est.iterations = lp.iterations;
  est.dual_value = lp.objective;
  const Eigen::VectorXd w = lp.duals.cwiseMax(0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    est.optimal_measure.add_atom(support[static_cast<std::size_t>(j)], w[j]);
  }
  est.value = est.optimal_measure.mass();
  est.constraint_values = K * w;
  est.constraint_gap = est.constraint_values.minCoeff() - 1.0;
  return est;
}

DiscreteMeasure witness_from_capacity(const CapacityEstimate& est, double T) {
  if (!(T > 0.0)) throw InputError("witness: T must be positive");
  return scale(est.optimal_measure, T);
}

DiscreteMeasure witness_from_capacity(const KernelSpec& k, std::span<const Point> target,
                                      std::span<const Point> support, double T) {
  return witness_from_capacity(capacity_lp(k, target, support), T);
}

NullSeries null_capacity_series(const KernelSpec& k, std::span<const Point> target, const CapacityEstimate& est,
                                int depth) {
  if (depth < 0) throw InputError("null_capacity_series: depth must be >= 0");
  NullSeries s;
  s.capacity = est.value;
  double total = 0.0;
  for (int n = 1; n <= depth; ++n) {
    const SeriesLevel level{n, n * est.value, std::ldexp(1.0, -n)};
    s.levels.push_back(level);
    if (!(level.mass < level.budget)) {
      std::ostringstream os;
      os.precision(6);
      os << "target not capacity-null at cap/resolution: level " << n << " needs mass " << level.mass
         << " >= budget " << level.budget << " (capacity estimate " << est.value << ", cap " << k.cap << ")";
      throw BudgetError(os.str());
    }
    total += n;
  }
  if (depth > 0) s.measure = scale(est.optimal_measure, total);
  s.target_min = kInfinity;
  for (const auto& x : target) s.target_min = std::min(s.target_min, truncated_potential(k, s.measure, x));
  return s;
}

NullSeries null_capacity_series(const KernelSpec& k, std::span<const Point> target, std::span<const Point> support,
                                int depth, const SimplexOptions& opts) {
  if (depth == 0) {
    NullSeries s;
    s.target_min = 0.0;
    return s;
  }
  return null_capacity_series(k, target, capacity_lp(k, target, support, opts), depth);
}

}  // namespace polarset
