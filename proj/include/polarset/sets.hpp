#pragma once

#include "polarset/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

namespace polarset {

class SetSpec;
using SetPtr = std::shared_ptr<const SetSpec>;

struct FinitePoints {
  std::vector<Point> points;
};

struct Ball {
  Point center;
  double radius = 1.0;
  bool closed = true;
};

/// Axis-aligned box [lo, hi] (or its interior when open).
struct Box {
  Point lo;
  Point hi;
  bool closed = true;
};

struct Segment {
  Point a;
  Point b;
};

/// Level-L middle-thirds approximant of the Cantor set on [lo, hi], placed on
/// the first coordinate axis: the union of 2^L closed intervals of length
/// (hi - lo) 3^-L.
struct Cantor {
  int level = 0;
  double lo = 0.0;
  double hi = 1.0;
};

struct Union {
  std::vector<SetPtr> members;
};

struct Intersection {
  std::vector<SetPtr> members;
};

/// Open neighborhood {x : dist(core, x) < radius}.
struct Neighborhood {
  SetPtr core;
  double radius = 0.0;
};

/// The closed complement of an open set.
struct ComplementOfOpen {
  SetPtr open;
};

struct WholeSpace {
  int dimension = 1;
};

/// One level of an exhaustion of an open base set:
///   {x in base : depth(x) > outer_margin, |x| < outer_window}
/// minus, when has_inner, the closed set {depth(x) >= inner_margin, |x| <= inner_window}.
/// depth is the lower bound on the distance to the complement of base.
struct LevelBand {
  SetPtr base;
  double outer_margin = 0.0;
  double outer_window = kInfinity;
  bool has_inner = false;
  double inner_margin = 0.0;
  double inner_window = 0.0;
};

using SetShape = std::variant<FinitePoints, Ball, Box, Segment, Cantor, Union, Intersection,
                              Neighborhood, ComplementOfOpen, WholeSpace, LevelBand>;

class SetSpec {
 public:
  SetSpec() : shape_(FinitePoints{}) {}
  SetSpec(SetShape shape) : shape_(std::move(shape)) {}  // NOLINT(google-explicit-constructor)

  const SetShape& shape() const { return shape_; }

  bool is_open() const;
  bool is_closed() const;
  bool is_empty() const;

 private:
  SetShape shape_;
};

inline SetPtr make_set(SetShape shape) { return std::make_shared<const SetSpec>(std::move(shape)); }

bool contains(const SetSpec& s, const Point& x);

/// Euclidean distance from x to the closure of s. Exact for every primitive and
/// for unions; a lower bound for intersections and band sets. Throws on empty sets.
double distance_to_set(const SetSpec& s, const Point& x);

/// 1-Lipschitz lower bound on the distance from x to the complement of s.
/// Positive exactly on (a subset of) the interior; exact for balls, boxes and
/// intervals.
double interior_depth(const SetSpec& s, const Point& x);

/// A nearest point of the closed set s to x. Defined for finite points, balls,
/// boxes, segments, Cantor approximants and unions of those.
Point nearest_point(const SetSpec& s, const Point& x);

/// Deterministic probe set of s at the given resolution: endpoints/corners plus
/// a uniform refinement. Cantor approximants are probed at their interval
/// endpoints (which lie in the Cantor set).
std::vector<Point> sample_set(const SetSpec& s, double resolution);

/// Unique k with M (r_k) <= dist(s, y) < (M+1) r_k, r_k = ((M+1)/M)^k.
/// shell_base = 3 gives the shells 3r <= t < 4r with r = (4/3)^k.
int shell_index(const SetSpec& s, const Point& y, double shell_base = 3.0);
int shell_index_for_distance(double t, double shell_base = 3.0);
double shell_radius(int k, double shell_base = 3.0);

/// Countable union of closed pieces, truncatable at any depth.
struct FSigmaSpec {
  std::function<SetSpec(int)> piece;  // m >= 1
  std::string description;

  /// Pieces taken from the list; indices past the end repeat the last piece.
  static FSigmaSpec from_pieces(std::vector<SetSpec> pieces, std::string description = "pieces");
  /// A_m = cantor(min(m, max_level)) or cantor(max_level) for every m.
  static FSigmaSpec cantor(int max_level, bool growing);
};

/// Decreasing open neighborhoods U_m = {dist(core_m, x) < eps_m}, m >= 1.
struct GDeltaSpec {
  std::function<SetSpec(int)> core;
  std::function<double(int)> eps;
  std::string description;
  SetPtr clip;  // when set, U_m is intersected with this open set

  SetSpec neighborhood(int m) const;
  /// Membership in the truncation: x in U_m for every m <= depth.
  bool contains_truncated(const Point& x, int depth) const;

  static GDeltaSpec around(SetSpec core, double eps_base = 0.5);
  static GDeltaSpec cantor(double eps_base = 0.5);
};

/// Increasing open sets V_n = {x in u : depth(x) > margin(n), |x| < window(n)}.
/// Harmonic form: margin = 1/raw(n), window = raw(n), raw(n) = first_raw + n - 1,
/// with first_raw the first nonempty raw level. Geometric form (for small sets):
/// margin = scale 2^-n, window = window0 + n.
struct ExhaustionSpec {
  SetPtr open;
  int first_raw = 1;
  int depth = 0;
  bool geometric = false;
  double scale = 1.0;
  double window0 = 0.0;

  int raw_index(int level) const { return first_raw + level - 1; }
  double margin(int level) const {
    return geometric ? std::ldexp(scale, -level) : 1.0 / raw_index(level);
  }
  double window(int level) const {
    return geometric ? window0 + level : static_cast<double>(raw_index(level));
  }

  /// level <= 0 is the empty set.
  bool contains(int level, const Point& x) const;
  /// Superset of the closure of level `level`.
  bool closure_contains(int level, const Point& x) const;
  /// Lower bound on dist(V_level, complement of V_{level+1}); inf for level <= 0.
  double separation(int level) const;
  /// Smallest level in [1, depth] containing x, or 0.
  int first_level(const Point& x) const;
  SetSpec level_set(int level) const;
  /// V_{outer} minus the closure of V_{inner}.
  SetSpec band(int outer, int inner) const;
};

/// Harmonic exhaustion of an open set; leading empty levels (judged on the
/// probes) are skipped. n_max = 0 picks the smallest depth whose last level
/// holds every probe with positive depth, plus two.
ExhaustionSpec standard_exhaustion(SetPtr u, int n_max, std::span<const Point> probes);

/// Geometric exhaustion scaled to the deepest probe, which lies in level 1.
ExhaustionSpec geometric_exhaustion(SetPtr u, std::span<const Point> probes, int depth = 64);

/// Checks closure(V_n) subset V_{n+1} on the probe grid for every generated level.
bool verify_exhaustion(const ExhaustionSpec& ex, std::span<const Point> probes);

/// Regular grid on a box with spacing <= h (corners included).
std::vector<Point> grid_points(const Point& lo, const Point& hi, double h);

}  // namespace polarset
