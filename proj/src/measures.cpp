#include "polarset/measures.hpp"

#include "polarset/parallel.hpp"

#include <algorithm>

namespace polarset {

namespace {
constexpr double kBucketWidth = 1e-9;  // >> kMergeTolerance, so merge partners share or neighbor a bucket
}

DiscreteMeasure DiscreteMeasure::dirac(const Point& x, double weight) {
  DiscreteMeasure mu;
  mu.add_atom(x, weight);
  return mu;
}

DiscreteMeasure DiscreteMeasure::from_atoms(std::span<const Atom> atoms) {
  DiscreteMeasure mu;
  for (const auto& a : atoms) mu.add_atom(a.point, a.weight);
  return mu;
}

long DiscreteMeasure::bucket_key(const Point& x) const {
  const double b = std::floor(x[0] / kBucketWidth);
  return static_cast<long>(std::clamp(b, -4e18, 4e18));
}

void DiscreteMeasure::add_atom(const Point& x, double weight) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) throw InputError("measure: weights must be finite and >= 0");
  if (x.size() == 0 || !x.allFinite()) throw InputError("measure: atom point must be finite");
  if (!atoms_.empty() && x.size() != dimension()) throw InputError("measure: mixed atom dimensions");
  if (weight == 0.0) return;
  const long key = bucket_key(x);
  for (long b = key - 1; b <= key + 1; ++b) {
    const auto it = buckets_.find(b);
    if (it == buckets_.end()) continue;
    for (std::size_t i : it->second) {
      if (same_point(atoms_[i].point, x)) {
        atoms_[i].weight += weight;
        return;
      }
    }
  }
  buckets_[key].push_back(atoms_.size());
  atoms_.push_back({x, weight});
}

double DiscreteMeasure::mass() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.weight;
  return m;
}

double DiscreteMeasure::weight_at(const Point& x) const {
  if (atoms_.empty() || x.size() != dimension()) return 0.0;
  const long key = bucket_key(x);
  for (long b = key - 1; b <= key + 1; ++b) {
    const auto it = buckets_.find(b);
    if (it == buckets_.end()) continue;
    for (std::size_t i : it->second) {
      if (same_point(atoms_[i].point, x)) return atoms_[i].weight;
    }
  }
  return 0.0;
}

std::vector<Point> DiscreteMeasure::support() const {
  std::vector<Point> out;
  out.reserve(atoms_.size());
  for (const auto& a : atoms_) out.push_back(a.point);
  return out;
}

DiscreteMeasure scale(const DiscreteMeasure& mu, double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw InputError("scale: factor must be finite and >= 0");
  DiscreteMeasure out;
  for (const auto& a : mu.atoms()) out.add_atom(a.point, c * a.weight);
  return out;
}

DiscreteMeasure add(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  DiscreteMeasure out = mu;
  for (const auto& a : nu.atoms()) out.add_atom(a.point, a.weight);
  return out;
}

DiscreteMeasure restrict(const DiscreteMeasure& mu, const SetSpec& s) {
  return restrict_if(mu, [&](const Point& x) { return contains(s, x); });
}

DiscreteMeasure restrict_if(const DiscreteMeasure& mu, const std::function<bool(const Point&)>& pred) {
  DiscreteMeasure out;
  for (const auto& a : mu.atoms()) {
    if (pred(a.point)) out.add_atom(a.point, a.weight);
  }
  return out;
}

bool dominated_by(const DiscreteMeasure& nu, const DiscreteMeasure& mu, double rel_tol) {
  for (const auto& a : nu.atoms()) {
    const double w = mu.weight_at(a.point);
    if (a.weight > w * (1.0 + rel_tol)) return false;
  }
  return true;
}

double potential(const KernelSpec& k, const DiscreteMeasure& mu, const Point& x) {
  double sum = 0.0;
  for (const auto& a : mu.atoms()) {
    const double g = eval_kernel(k, x, a.point);
    if (g == kInfinity) return kInfinity;
    sum += a.weight * g;
  }
  return sum;
}

double truncated_potential(const KernelSpec& k, const DiscreteMeasure& mu, const Point& x) {
  double sum = 0.0;
  for (const auto& a : mu.atoms()) sum += a.weight * truncated_kernel(k, x, a.point);
  return sum;
}

double PotentialField::min() const {
  return values.empty() ? kInfinity : *std::min_element(values.begin(), values.end());
}

double PotentialField::max() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

PotentialField potential_field(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes,
                               bool truncated) {
  PotentialField f;
  f.probes.assign(probes.begin(), probes.end());
  f.values = parallel_map<double>(probes.size(), [&](std::size_t i) {
    return truncated ? truncated_potential(k, mu, probes[i]) : potential(k, mu, probes[i]);
  });
  return f;
}

double distance_to_support(const DiscreteMeasure& mu, const Point& x) {
  double best = kInfinity;
  for (const auto& a : mu.atoms()) best = std::min(best, distance(a.point, x));
  return best;
}

}  // namespace polarset
