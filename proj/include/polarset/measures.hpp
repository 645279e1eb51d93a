#pragma once

#include "polarset/kernel.hpp"
#include "polarset/sets.hpp"

#include <map>

namespace polarset {

struct Atom {
  Point point;
  double weight = 0.0;
};

/// Finitely supported nonnegative measure. Atoms closer than kMergeTolerance
/// are merged (the first point's coordinates are kept); zero weights are dropped.
/// Atom order is insertion order, which fixes every summation order downstream.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  static DiscreteMeasure dirac(const Point& x, double weight = 1.0);
  static DiscreteMeasure from_atoms(std::span<const Atom> atoms);

  /// Throws InputError on negative or non-finite weights and mixed dimensions.
  void add_atom(const Point& x, double weight);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  Eigen::Index dimension() const { return atoms_.empty() ? 0 : atoms_.front().point.size(); }

  double mass() const;
  /// Weight of the atom at x (0 if none).
  double weight_at(const Point& x) const;
  std::vector<Point> support() const;

 private:
  long bucket_key(const Point& x) const;

  std::vector<Atom> atoms_;
  std::map<long, std::vector<std::size_t>> buckets_;  // first-coordinate hash for merging
};

DiscreteMeasure scale(const DiscreteMeasure& mu, double c);
DiscreteMeasure add(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
DiscreteMeasure restrict(const DiscreteMeasure& mu, const SetSpec& s);
/// Atoms for which pred(point) is true.
DiscreteMeasure restrict_if(const DiscreteMeasure& mu, const std::function<bool(const Point&)>& pred);

/// nu <= mu atomwise (every atom of nu sits on an atom of mu with at least its weight).
bool dominated_by(const DiscreteMeasure& nu, const DiscreteMeasure& mu, double rel_tol = 1e-12);

/// Gmu(x) in extended arithmetic: +inf iff x is an atom of positive weight.
double potential(const KernelSpec& k, const DiscreteMeasure& mu, const Point& x);

/// sum_i w_i min(G(x, y_i), cap); finite everywhere.
double truncated_potential(const KernelSpec& k, const DiscreteMeasure& mu, const Point& x);

struct PotentialField {
  std::vector<Point> probes;
  std::vector<double> values;

  double min() const;
  double max() const;
};

PotentialField potential_field(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes,
                               bool truncated = false);

/// Distance from x to the nearest atom (inf for the zero measure).
double distance_to_support(const DiscreteMeasure& mu, const Point& x);

}  // namespace polarset
