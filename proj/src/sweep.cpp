#include "polarset/sweep.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace polarset {

namespace {

std::string describe(const Point& x) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ")";
  return os.str();
}

std::vector<Point> sorted_centers(const SetSpec& A, const std::vector<Point>& A0) {
  std::vector<Point> centers = A0;
  std::sort(centers.begin(), centers.end(), lex_less);
  for (const auto& c : centers) {
    if (!contains(A, c)) throw InputError("sweep: dense sample point " + describe(c) + " is not in A");
  }
  return centers;
}

ShellPartition partition_with(const SetSpec& A, const std::vector<Point>* centers, const DiscreteMeasure& mu,
                              double r, double M, std::vector<SweepAssignment>* record) {
  ShellPartition part;
  part.radius = r;
  part.shell = static_cast<int>(std::lround(std::log(r) / std::log((M + 1.0) / M)));
  const double reach = (M + 2.0) * r;

  std::map<std::size_t, ShellBlock> by_center;  // center index -> block (index order = output order)
  std::vector<Point> projected;                 // centers used when no sample is given
  for (const auto& a : mu.atoms()) {
    const double t = distance_to_set(A, a.point);
    if (t < M * r * (1.0 - 1e-12) || t >= (M + 1.0) * r * (1.0 + 1e-12)) {
      throw InputError("shell_partition: atom " + describe(a.point) + " lies outside the shell");
    }
    std::size_t idx = 0;
    if (centers != nullptr) {
      bool found = false;
      for (; idx < centers->size(); ++idx) {
        if (distance(a.point, (*centers)[idx]) < reach) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw InputError("shell_partition: no admissible center for atom " + describe(a.point) +
                         " (dense sample too coarse)");
      }
    } else {
      const Point p = nearest_point(A, a.point);
      idx = 0;
      while (idx < projected.size() && !same_point(projected[idx], p)) ++idx;
      if (idx == projected.size()) projected.push_back(p);
    }
    const Point& center = centers != nullptr ? (*centers)[idx] : projected[idx];
    auto& block = by_center[idx];
    block.center = center;
    block.part.add_atom(a.point, a.weight);
    if (record != nullptr) record->push_back({a.point, a.weight, center, r, t});
  }
  for (auto& [idx, block] : by_center) part.blocks.push_back(std::move(block));
  return part;
}

}  // namespace

double sweep_factor(double gamma, double shell_base) {
  if (shell_base == 3.0) return std::pow(3.0, -gamma);
  return std::pow(2.0 + 2.0 / shell_base, -gamma);
}

ShellPartition shell_partition(const SetSpec& A, const std::optional<std::vector<Point>>& A0,
                               const DiscreteMeasure& mu, double r, double shell_base) {
  if (!(r > 0.0)) throw InputError("shell_partition: radius must be positive");
  if (!(shell_base >= 1.0)) throw InputError("shell_partition: shell base must be >= 1");
  if (A0) {
    const auto centers = sorted_centers(A, *A0);
    return partition_with(A, &centers, mu, r, shell_base, nullptr);
  }
  return partition_with(A, nullptr, mu, r, shell_base, nullptr);
}

SweepResult sweep_off_set(const KernelSpec& k, const SetSpec& A, const std::optional<std::vector<Point>>& A0,
                          const DiscreteMeasure& mu, double shell_base) {
  if (!(shell_base >= 1.0)) throw InputError("sweep: shell base must be >= 1");
  std::optional<std::vector<Point>> centers;
  if (A0) centers = sorted_centers(A, *A0);

  std::map<int, DiscreteMeasure> shells;
  for (const auto& a : mu.atoms()) {
    const double t = distance_to_set(A, a.point);
    if (t <= kMergeTolerance) {
      throw InputError("sweep_off_set: atom " + describe(a.point) + " lies on A (use sweep_to_closed)");
    }
    shells[shell_index_for_distance(t, shell_base)].add_atom(a.point, a.weight);
  }

  SweepResult out;
  out.guaranteed_factor = sweep_factor(k.gamma, shell_base);
  for (const auto& [shell, part_mu] : shells) {
    const double r = shell_radius(shell, shell_base);
    const auto part =
        partition_with(A, centers ? &*centers : nullptr, part_mu, r, shell_base, &out.assignments);
    for (const auto& block : part.blocks) out.measure.add_atom(block.center, block.part.mass());
  }
  return out;
}

SweepResult sweep_to_closed(const KernelSpec& k, const SetSpec& A, const DiscreteMeasure& mu,
                            const std::optional<std::vector<Point>>& A0, double shell_base) {
  DiscreteMeasure on_set;
  DiscreteMeasure off_set;
  for (const auto& a : mu.atoms()) {
    if (distance_to_set(A, a.point) <= kMergeTolerance) {
      on_set.add_atom(a.point, a.weight);
    } else {
      off_set.add_atom(a.point, a.weight);
    }
  }
  SweepResult out = sweep_off_set(k, A, A0, off_set, shell_base);
  out.measure = add(on_set, out.measure);
  return out;
}

DiscreteMeasure discrete_approximation(const DiscreteMeasure& mu, std::span<const Point> A0, int n) {
  if (n < 1) throw InputError("discrete_approximation: n must be >= 1");
  std::vector<Point> centers(A0.begin(), A0.end());
  std::sort(centers.begin(), centers.end(), lex_less);
  const double radius = 1.0 / n;
  DiscreteMeasure out;
  for (const auto& a : mu.atoms()) {
    const Point* target = nullptr;
    for (const auto& c : centers) {
      if (same_point(c, a.point)) {
        target = &c;
        break;
      }
    }
    if (target == nullptr) {
      for (const auto& c : centers) {
        if (distance(c, a.point) < radius) {
          target = &c;
          break;
        }
      }
    }
    if (target == nullptr) {
      throw InputError("discrete_approximation: atom " + describe(a.point) + " is not within 1/" +
                       std::to_string(n) + " of the dense sample");
    }
    out.add_atom(*target, a.weight);
  }
  return out;
}

Refinement refine_until(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes,
                        std::span<const double> phi, const Approximant& approx, const RefineOptions& opts) {
  if (phi.size() != probes.size()) throw InputError("refine_until: one threshold per probe required");
  if (opts.n_start < 1 || opts.n_max < opts.n_start) throw InputError("refine_until: bad n range");
  double worst = -kInfinity;
  std::string last_error;
  for (long n = opts.n_start; n <= opts.n_max; n *= 2) {
    DiscreteMeasure candidate;
    try {
      candidate = approx(mu, static_cast<int>(n));
    } catch (const InputError& e) {
      last_error = e.what();
      continue;
    }
    double margin = kInfinity;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const double g = opts.truncated ? truncated_potential(k, candidate, probes[i]) : potential(k, candidate, probes[i]);
      margin = std::min(margin, g - phi[i]);
    }
    if (margin > 0.0) return {static_cast<int>(n), std::move(candidate), margin};
    worst = std::max(worst, margin);
  }
  std::ostringstream os;
  os.precision(6);
  os << "refine_until: no n <= " << opts.n_max << " reaches the threshold; best worst-probe margin " << worst;
  if (!last_error.empty()) os << "; last approximation error: " << last_error;
  throw BudgetError(os.str());
}

Refinement refine_until(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes,
                        std::span<const double> phi, std::span<const Point> A0, const RefineOptions& opts) {
  std::vector<Point> sample(A0.begin(), A0.end());
  return refine_until(
      k, mu, probes, phi,
      [sample](const DiscreteMeasure& m, int n) { return discrete_approximation(m, sample, n); }, opts);
}

}  // namespace polarset
