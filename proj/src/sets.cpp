#include "polarset/sets.hpp"

#include <algorithm>
#include <cmath>

namespace polarset {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Nearest point of the 1-D Cantor approximant to t. Descends into the third
// on t's side of the midpoint: every point of the far third is farther than
// the near third's inner endpoint, which the near part always contains.
double cantor_nearest_1d(double t, double a, double b, int level) {
  for (int l = 0; l < level; ++l) {
    const double h = (b - a) / 3.0;
    if (t <= a + 1.5 * h) {
      b = a + h;
    } else {
      a = b - h;
    }
  }
  return std::clamp(t, a, b);
}

// Depth of t inside the 1-D Cantor approximant (0 outside).
double cantor_depth_1d(double t, double a, double b, int level) {
  for (int l = 0; l < level; ++l) {
    const double h = (b - a) / 3.0;
    if (t <= a + h) {
      b = a + h;
    } else if (t >= b - h) {
      a = b - h;
    } else {
      return 0.0;
    }
  }
  if (t < a || t > b) return 0.0;
  return std::min(t - a, b - t);
}

double tail_norm_sq(const Point& x) {
  return x.size() > 1 ? x.tail(x.size() - 1).squaredNorm() : 0.0;
}

Point segment_projection(const Segment& s, const Point& x) {
  const Point ab = s.b - s.a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return s.a;
  const double t = std::clamp((x - s.a).dot(ab) / len2, 0.0, 1.0);
  return s.a + t * ab;
}

void require_dim(const Point& a, const Point& x, const char* what) {
  if (a.size() != x.size()) throw InputError(std::string(what) + ": dimension mismatch");
}

void append_unique(std::vector<Point>& out, const Point& p) {
  for (const auto& q : out) {
    if (same_point(p, q)) return;
  }
  out.push_back(p);
}

}  // namespace

bool SetSpec::is_open() const {
  return std::visit(overloaded{
                        [](const Ball& b) { return !b.closed; },
                        [](const Box& b) { return !b.closed; },
                        [](const Union& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const SetPtr& m) { return m->is_open(); });
                        },
                        [](const Intersection& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const SetPtr& m) { return m->is_open(); });
                        },
                        [](const Neighborhood&) { return true; },
                        [](const WholeSpace&) { return true; },
                        [](const LevelBand&) { return true; },
                        [](const FinitePoints& f) { return f.points.empty(); },
                        [](const auto&) { return false; },
                    },
                    shape_);
}

bool SetSpec::is_closed() const {
  return std::visit(overloaded{
                        [](const Ball& b) { return b.closed; },
                        [](const Box& b) { return b.closed; },
                        [](const Union& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const SetPtr& m) { return m->is_closed(); });
                        },
                        [](const Intersection& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const SetPtr& m) { return m->is_closed(); });
                        },
                        [](const Neighborhood&) { return false; },
                        [](const LevelBand&) { return false; },
                        [](const auto&) { return true; },
                    },
                    shape_);
}

bool SetSpec::is_empty() const {
  return std::visit(overloaded{
                        [](const FinitePoints& f) { return f.points.empty(); },
                        [](const Union& u) {
                          return std::all_of(u.members.begin(), u.members.end(),
                                             [](const SetPtr& m) { return m->is_empty(); });
                        },
                        [](const auto&) { return false; },
                    },
                    shape_);
}

bool contains(const SetSpec& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const FinitePoints& f) {
            return std::any_of(f.points.begin(), f.points.end(),
                               [&](const Point& p) { return same_point(p, x); });
          },
          [&](const Ball& b) {
            require_dim(b.center, x, "ball");
            const double r = distance(b.center, x);
            return b.closed ? r <= b.radius + kMergeTolerance : r < b.radius;
          },
          [&](const Box& b) {
            require_dim(b.lo, x, "box");
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              if (b.closed) {
                if (x[i] < b.lo[i] - kMergeTolerance || x[i] > b.hi[i] + kMergeTolerance) return false;
              } else if (!(x[i] > b.lo[i] && x[i] < b.hi[i])) {
                return false;
              }
            }
            return true;
          },
          [&](const Segment&) { return distance_to_set(s, x) <= kMergeTolerance; },
          [&](const Cantor&) { return distance_to_set(s, x) <= kMergeTolerance; },
          [&](const Union& u) {
            return std::any_of(u.members.begin(), u.members.end(),
                               [&](const SetPtr& m) { return contains(*m, x); });
          },
          [&](const Intersection& u) {
            return std::all_of(u.members.begin(), u.members.end(),
                               [&](const SetPtr& m) { return contains(*m, x); });
          },
          [&](const Neighborhood& n) { return distance_to_set(*n.core, x) < n.radius; },
          [&](const ComplementOfOpen& c) { return !contains(*c.open, x); },
          [&](const WholeSpace&) { return true; },
          [&](const LevelBand& b) {
            const double depth = interior_depth(*b.base, x);
            const double r = x.norm();
            if (!(depth > b.outer_margin && r < b.outer_window)) return false;
            return !(b.has_inner && depth >= b.inner_margin && r <= b.inner_window);
          },
      },
      s.shape());
}

double distance_to_set(const SetSpec& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const FinitePoints& f) {
            if (f.points.empty()) throw InputError("distance_to_set: empty point set");
            double best = kInfinity;
            for (const auto& p : f.points) {
              require_dim(p, x, "finite_points");
              best = std::min(best, distance(p, x));
            }
            return best;
          },
          [&](const Ball& b) {
            require_dim(b.center, x, "ball");
            return std::max(0.0, distance(b.center, x) - b.radius);
          },
          [&](const Box& b) {
            require_dim(b.lo, x, "box");
            const Point clamped = x.cwiseMax(b.lo).cwiseMin(b.hi);
            return distance(clamped, x);
          },
          [&](const Segment& sg) {
            require_dim(sg.a, x, "segment");
            return distance(segment_projection(sg, x), x);
          },
          [&](const Cantor& c) {
            const double t = x[0];
            const double d1 = t - cantor_nearest_1d(t, c.lo, c.hi, c.level);
            return std::sqrt(d1 * d1 + tail_norm_sq(x));
          },
          [&](const Union& u) {
            double best = kInfinity;
            for (const auto& m : u.members) {
              if (!m->is_empty()) best = std::min(best, distance_to_set(*m, x));
            }
            if (best == kInfinity) throw InputError("distance_to_set: empty union");
            return best;
          },
          [&](const Intersection& u) {
            double bound = 0.0;
            for (const auto& m : u.members) bound = std::max(bound, distance_to_set(*m, x));
            return bound;
          },
          [&](const Neighborhood& n) {
            return std::max(0.0, distance_to_set(*n.core, x) - n.radius);
          },
          [&](const ComplementOfOpen& c) {
            return contains(*c.open, x) ? interior_depth(*c.open, x) : 0.0;
          },
          [&](const WholeSpace&) { return 0.0; },
          [&](const LevelBand& b) {
            if (contains(s, x)) return 0.0;
            const double depth = interior_depth(*b.base, x);
            return std::max({0.0, b.outer_margin - depth, x.norm() - b.outer_window});
          },
      },
      s.shape());
}

double interior_depth(const SetSpec& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const FinitePoints&) { return 0.0; },
          [&](const Ball& b) {
            require_dim(b.center, x, "ball");
            return std::max(0.0, b.radius - distance(b.center, x));
          },
          [&](const Box& b) {
            require_dim(b.lo, x, "box");
            double depth = kInfinity;
            for (Eigen::Index i = 0; i < x.size(); ++i) {
              depth = std::min({depth, x[i] - b.lo[i], b.hi[i] - x[i]});
            }
            return std::max(0.0, depth);
          },
          [&](const Segment& sg) {
            if (x.size() != 1) return 0.0;
            const double lo = std::min(sg.a[0], sg.b[0]);
            const double hi = std::max(sg.a[0], sg.b[0]);
            return std::max(0.0, std::min(x[0] - lo, hi - x[0]));
          },
          [&](const Cantor& c) {
            if (x.size() != 1) return 0.0;
            return cantor_depth_1d(x[0], c.lo, c.hi, c.level);
          },
          [&](const Union& u) {
            double depth = 0.0;
            for (const auto& m : u.members) depth = std::max(depth, interior_depth(*m, x));
            return depth;
          },
          [&](const Intersection& u) {
            double depth = kInfinity;
            for (const auto& m : u.members) depth = std::min(depth, interior_depth(*m, x));
            return u.members.empty() ? 0.0 : depth;
          },
          [&](const Neighborhood& n) {
            return std::max(0.0, n.radius - distance_to_set(*n.core, x));
          },
          [&](const ComplementOfOpen& c) { return distance_to_set(*c.open, x); },
          [&](const WholeSpace&) { return kInfinity; },
          [&](const LevelBand& b) {
            const double depth = interior_depth(*b.base, x);
            const double r = x.norm();
            double out = std::min(depth - b.outer_margin, b.outer_window - r);
            if (b.has_inner) out = std::min(out, std::max(b.inner_margin - depth, r - b.inner_window));
            return std::max(0.0, out);
          },
      },
      s.shape());
}

Point nearest_point(const SetSpec& s, const Point& x) {
  return std::visit(
      overloaded{
          [&](const FinitePoints& f) -> Point {
            if (f.points.empty()) throw InputError("nearest_point: empty point set");
            std::size_t best = 0;
            double best_d = kInfinity;
            for (std::size_t i = 0; i < f.points.size(); ++i) {
              const double d = distance(f.points[i], x);
              if (d < best_d) {
                best_d = d;
                best = i;
              }
            }
            return f.points[best];
          },
          [&](const Ball& b) -> Point {
            const Point v = x - b.center;
            const double r = v.norm();
            if (r <= b.radius) return x;
            return b.center + v * (b.radius / r);
          },
          [&](const Box& b) -> Point { return x.cwiseMax(b.lo).cwiseMin(b.hi); },
          [&](const Segment& sg) -> Point { return segment_projection(sg, x); },
          [&](const Cantor& c) -> Point {
            Point p = Point::Zero(x.size());
            p[0] = cantor_nearest_1d(x[0], c.lo, c.hi, c.level);
            return p;
          },
          [&](const Union& u) -> Point {
            const SetSpec* best = nullptr;
            double best_d = kInfinity;
            for (const auto& m : u.members) {
              if (m->is_empty()) continue;
              const double d = distance_to_set(*m, x);
              if (d < best_d) {
                best_d = d;
                best = m.get();
              }
            }
            if (best == nullptr) throw InputError("nearest_point: empty union");
            return nearest_point(*best, x);
          },
          [&](const auto&) -> Point {
            throw InputError("nearest_point: not available for this set type");
          },
      },
      s.shape());
}

std::vector<Point> grid_points(const Point& lo, const Point& hi, double h) {
  if (!(h > 0.0)) throw InputError("grid: resolution must be positive");
  const auto dim = lo.size();
  std::vector<int> counts(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double span = hi[i] - lo[i];
    counts[static_cast<std::size_t>(i)] = span > 0.0 ? static_cast<int>(std::ceil(span / h - 1e-9)) : 0;
  }
  std::vector<Point> out;
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  while (true) {
    Point p(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const int n = counts[static_cast<std::size_t>(i)];
      p[i] = n == 0 ? lo[i] : lo[i] + (hi[i] - lo[i]) * idx[static_cast<std::size_t>(i)] / n;
    }
    out.push_back(std::move(p));
    Eigen::Index d = dim - 1;
    while (d >= 0) {
      auto& k = idx[static_cast<std::size_t>(d)];
      if (k < counts[static_cast<std::size_t>(d)]) {
        ++k;
        break;
      }
      k = 0;
      --d;
    }
    if (d < 0) break;
  }
  return out;
}

std::vector<Point> sample_set(const SetSpec& s, double resolution) {
  if (!(resolution > 0.0)) throw InputError("sample_set: resolution must be positive");
  return std::visit(
      overloaded{
          [&](const FinitePoints& f) { return f.points; },
          [&](const Ball& b) {
            const auto dim = b.center.size();
            const Point r = Point::Constant(dim, b.radius);
            std::vector<Point> out{b.center};
            for (auto& p : grid_points(b.center - r, b.center + r, resolution)) {
              if (contains(s, p)) append_unique(out, p);
            }
            if (b.closed && dim == 1) {
              append_unique(out, b.center - r);
              append_unique(out, b.center + r);
            } else if (b.closed && dim == 2) {
              const double pi = std::acos(-1.0);
              const int n = std::max(8, static_cast<int>(std::ceil(2.0 * pi * b.radius / resolution)));
              for (int i = 0; i < n; ++i) {
                const double t = 2.0 * pi * i / n;
                append_unique(out, b.center + b.radius * point2(std::cos(t), std::sin(t)));
              }
            }
            return out;
          },
          [&](const Box& b) {
            auto pts = grid_points(b.lo, b.hi, resolution);
            if (!b.closed) std::erase_if(pts, [&](const Point& p) { return !contains(s, p); });
            return pts;
          },
          [&](const Segment& sg) {
            const int n = std::max(1, static_cast<int>(std::ceil(distance(sg.a, sg.b) / resolution - 1e-9)));
            std::vector<Point> out;
            for (int i = 0; i <= n; ++i) out.push_back(sg.a + (sg.b - sg.a) * (static_cast<double>(i) / n));
            return out;
          },
          [&](const Cantor& c) {
            std::vector<std::pair<double, double>> intervals{{c.lo, c.hi}};
            for (int l = 0; l < c.level; ++l) {
              std::vector<std::pair<double, double>> next;
              for (const auto& [a, b] : intervals) {
                const double h = (b - a) / 3.0;
                next.emplace_back(a, a + h);
                next.emplace_back(b - h, b);
              }
              intervals = std::move(next);
            }
            std::vector<Point> out;
            for (const auto& [a, b] : intervals) {
              out.push_back(point1(a));
              out.push_back(point1(b));
            }
            return out;
          },
          [&](const Union& u) {
            std::vector<Point> out;
            for (const auto& m : u.members) {
              if (m->is_empty()) continue;
              for (auto& p : sample_set(*m, resolution)) append_unique(out, p);
            }
            return out;
          },
          [&](const Intersection& u) {
            if (u.members.empty()) throw InputError("sample_set: empty intersection list");
            auto pts = sample_set(*u.members.front(), resolution);
            std::erase_if(pts, [&](const Point& p) { return !contains(s, p); });
            return pts;
          },
          [&](const Neighborhood& n) {
            auto pts = sample_set(*n.core, resolution);
            std::erase_if(pts, [&](const Point& p) { return !contains(s, p); });
            return pts;
          },
          [&](const LevelBand& b) {
            auto pts = sample_set(*b.base, resolution);
            std::erase_if(pts, [&](const Point& p) { return !contains(s, p); });
            return pts;
          },
          [&](const auto&) -> std::vector<Point> {
            throw InputError("sample_set: unbounded set has no probe set");
          },
      },
      s.shape());
}

int shell_index_for_distance(double t, double shell_base) {
  if (!(t > 0.0)) throw InputError("shell_index: point lies on the set");
  if (!(shell_base > 0.0)) throw InputError("shell_index: shell base must be positive");
  const double q = (shell_base + 1.0) / shell_base;
  int k = static_cast<int>(std::floor(std::log(t / shell_base) / std::log(q)));
  while (shell_base * shell_radius(k, shell_base) > t) --k;
  while ((shell_base + 1.0) * shell_radius(k, shell_base) <= t) ++k;
  return k;
}

double shell_radius(int k, double shell_base) {
  return std::pow((shell_base + 1.0) / shell_base, k);
}

int shell_index(const SetSpec& s, const Point& y, double shell_base) {
  const double t = distance_to_set(s, y);
  if (t <= kMergeTolerance) throw InputError("shell_index: point lies on the set");
  return shell_index_for_distance(t, shell_base);
}

FSigmaSpec FSigmaSpec::from_pieces(std::vector<SetSpec> pieces, std::string description) {
  if (pieces.empty()) throw InputError("fsigma: no pieces");
  auto shared = std::make_shared<const std::vector<SetSpec>>(std::move(pieces));
  FSigmaSpec f;
  f.description = std::move(description);
  f.piece = [shared](int m) {
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(m, 1)) - 1, shared->size() - 1);
    return (*shared)[i];
  };
  return f;
}

FSigmaSpec FSigmaSpec::cantor(int max_level, bool growing) {
  FSigmaSpec f;
  f.description = growing ? "cantor(growing)" : "cantor(fixed)";
  f.piece = [max_level, growing](int m) {
    return SetSpec(Cantor{growing ? std::min(m, max_level) : max_level, 0.0, 1.0});
  };
  return f;
}

SetSpec GDeltaSpec::neighborhood(int m) const {
  SetSpec u(Neighborhood{std::make_shared<const SetSpec>(core(m)), eps(m)});
  if (!clip) return u;
  return SetSpec(Intersection{{std::make_shared<const SetSpec>(std::move(u)), clip}});
}

bool GDeltaSpec::contains_truncated(const Point& x, int depth) const {
  for (int m = 1; m <= depth; ++m) {
    if (!polarset::contains(neighborhood(m), x)) return false;
  }
  return true;
}

GDeltaSpec GDeltaSpec::around(SetSpec core, double eps_base) {
  if (!(eps_base > 0.0 && eps_base < 1.0)) throw InputError("gdelta: eps base must lie in (0,1)");
  GDeltaSpec g;
  g.description = "neighborhoods";
  g.core = [core = std::move(core)](int) { return core; };
  g.eps = [eps_base](int m) { return std::pow(eps_base, m); };
  return g;
}

GDeltaSpec GDeltaSpec::cantor(double eps_base) {
  if (!(eps_base > 0.0 && eps_base < 1.0)) throw InputError("gdelta: eps base must lie in (0,1)");
  GDeltaSpec g;
  g.description = "cantor";
  g.core = [](int m) { return SetSpec(Cantor{m, 0.0, 1.0}); };
  g.eps = [eps_base](int m) { return std::pow(eps_base, m); };
  return g;
}

bool ExhaustionSpec::contains(int level, const Point& x) const {
  if (level <= 0) return false;
  return interior_depth(*open, x) > margin(level) && x.norm() < window(level);
}

bool ExhaustionSpec::closure_contains(int level, const Point& x) const {
  if (level <= 0) return false;
  return interior_depth(*open, x) >= margin(level) && x.norm() <= window(level);
}

double ExhaustionSpec::separation(int level) const {
  if (level <= 0) return kInfinity;
  return std::min(margin(level) - margin(level + 1), window(level + 1) - window(level));
}

int ExhaustionSpec::first_level(const Point& x) const {
  if (!contains(depth, x)) return 0;
  int lo = 1;
  int hi = depth;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (contains(mid, x)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo;
}

SetSpec ExhaustionSpec::level_set(int level) const {
  if (level <= 0) return SetSpec(FinitePoints{});
  return SetSpec(LevelBand{open, margin(level), window(level), false, 0.0, 0.0});
}

SetSpec ExhaustionSpec::band(int outer, int inner) const {
  if (outer <= 0) return SetSpec(FinitePoints{});
  LevelBand b{open, margin(outer), window(outer), false, 0.0, 0.0};
  if (inner >= 1) {
    b.has_inner = true;
    b.inner_margin = margin(inner);
    b.inner_window = window(inner);
  }
  return SetSpec(b);
}

ExhaustionSpec standard_exhaustion(SetPtr u, int n_max, std::span<const Point> probes) {
  if (!u || !u->is_open()) throw InputError("exhaustion: the set must be open");
  if (n_max < 0) throw InputError("exhaustion: n_max must be >= 0");
  long best = -1;
  long worst = -1;
  for (const auto& p : probes) {
    const double depth = interior_depth(*u, p);
    if (!(depth > 0.0)) continue;
    const double r = p.norm();
    const double bound = std::max(depth == kInfinity ? 0.0 : 1.0 / depth, r);
    if (bound > 1e9) continue;
    long n = static_cast<long>(std::floor(bound)) + 1;
    while (!(1.0 / n < depth && r < n)) ++n;
    while (n > 1 && 1.0 / (n - 1) < depth && r < n - 1) --n;
    if (best < 0 || n < best) best = n;
    worst = std::max(worst, n);
  }
  if (best < 0) throw InputError("exhaustion: no probe lies inside the open set");
  ExhaustionSpec ex;
  ex.open = std::move(u);
  ex.first_raw = static_cast<int>(best);
  ex.depth = n_max > 0 ? n_max : static_cast<int>(worst - best + 3);
  return ex;
}

ExhaustionSpec geometric_exhaustion(SetPtr u, std::span<const Point> probes, int depth) {
  if (!u || !u->is_open()) throw InputError("exhaustion: the set must be open");
  if (depth < 1) throw InputError("exhaustion: depth must be >= 1");
  double scale = 0.0;
  double radius = 0.0;
  for (const auto& p : probes) {
    const double d = interior_depth(*u, p);
    if (d > 0.0) scale = std::max(scale, std::min(d, 1.0));
    radius = std::max(radius, p.norm());
  }
  if (!(scale > 0.0)) throw InputError("exhaustion: no probe lies inside the open set");
  ExhaustionSpec ex;
  ex.open = std::move(u);
  ex.geometric = true;
  ex.scale = scale;
  ex.window0 = std::ceil(radius);
  ex.depth = depth;
  return ex;
}

bool verify_exhaustion(const ExhaustionSpec& ex, std::span<const Point> probes) {
  for (int level = 1; level < ex.depth; ++level) {
    for (const auto& p : probes) {
      if (ex.closure_contains(level, p) && !ex.contains(level + 1, p)) return false;
    }
  }
  return true;
}

}  // namespace polarset
