#include <doctest.h>

#include "polarset/choquet.hpp"
#include "support/generators.hpp"

#include <cmath>

using namespace polarset;

namespace {

std::vector<Point> line_grid(double lo, double hi, double h) { return grid_points(point1(lo), point1(hi), h); }

std::vector<Point> outside(const SetSpec& s, std::vector<Point> pts) {
  std::erase_if(pts, [&](const Point& x) { return contains(s, x); });
  return pts;
}

std::vector<Point> away_from(const DiscreteMeasure& mu, std::vector<Point> pts, double d) {
  std::erase_if(pts, [&](const Point& x) { return distance_to_support(mu, x) < d; });
  return pts;
}

// Lower semicontinuity at resolution h: a probe above t keeps a symmetric
// neighborhood above t at some dyadic refinement of h.
bool superlevel_open(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes, double t,
                     double h) {
  for (const auto& x : probes) {
    if (!(potential(k, mu, x) > t)) continue;
    bool found = false;
    for (int j = 0; j < 40 && !found; ++j) {
      const double s = std::ldexp(h, -j);
      Point lo = x;
      Point hi = x;
      lo[0] -= s;
      hi[0] += s;
      found = potential(k, mu, lo) > t && potential(k, mu, hi) > t;
    }
    if (!found) return false;
  }
  return true;
}

const SetPtr kUnit = make_set(Ball{point1(0), 1.0, false});

}  // namespace

TEST_CASE("super level set of a Dirac") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto mu = DiscreteMeasure::dirac(point1(0));
  const std::vector<Point> c{point1(0), point1(0.5)};
  const auto s = super_level_set(k, mu, 4.0, c, SetSpec(WholeSpace{1}));
  REQUIRE(s.centers.size() == 1);
  CHECK(s.radii[0] <= 0.25);
  CHECK(s.radii[0] == doctest::Approx(0.25).epsilon(1e-9));
  const auto t = super_level_set(k, mu, 4.0, c, SetSpec(Ball{point1(0), 0.1, false}));
  CHECK(t.radii[0] <= 0.1);
}

TEST_CASE("super level sets are sound") {
  testing::Gen gen(61);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = gen.integer(1, 2);
    const auto k = KernelSpec::metric_power(gen.uniform(0.5, 1.5));
    DiscreteMeasure mu;
    for (int i = gen.integer(1, 6); i > 0; --i) mu.add_atom(gen.point(dim, -1, 1), gen.uniform(0.01, 0.2));
    const double t = gen.uniform(0.5, 5);
    std::vector<Point> cand = gen.cloud(40, dim, -1, 1);
    for (const auto& a : mu.atoms()) cand.push_back(a.point);
    const auto s = super_level_set(k, mu, t, cand, SetSpec(WholeSpace{dim}));
    for (int i = 0; i < 500; ++i) {
      const Point x = gen.point(dim, -1.5, 1.5);
      if (contains(*s.set, x)) CHECK(potential(k, mu, x) > t);
    }
  }
}

TEST_CASE("thinning with nothing to protect returns the input") {
  const auto k = KernelSpec::metric_power(1.0);
  DiscreteMeasure nu0;
  nu0.add_atom(point1(0), 0.01);
  nu0.add_atom(point1(0.9), 0.01);
  const auto probes = line_grid(-2, 2, 0.1);
  const auto r = thin_to_finite(k, kUnit, nu0, 1000.0, probes, {}, make_set(FinitePoints{}));
  CHECK(r.measure.size() == nu0.size());
  for (const auto& a : nu0.atoms()) CHECK(r.measure.weight_at(a.point) == a.weight);
}

TEST_CASE("a single deep atom survives thinning") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto nu0 = DiscreteMeasure::dirac(point1(0), 0.5);
  const auto probes = line_grid(-2, 2, 0.05);
  const auto r = thin_to_finite(k, kUnit, nu0, 1.0, probes, {});
  CHECK(all_pass(r.checks));
  CHECK(r.measure.weight_at(point1(0)) == 0.5);
  for (const auto& l : r.trace.levels) CHECK(l.removed_mass == 0.0);
}

TEST_CASE("thinning telescopes on random instances") {
  testing::Gen gen(62);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = KernelSpec::metric_power(gen.uniform(0.5, 1.5));
    DiscreteMeasure nu0;
    for (int i = gen.integer(2, 12); i > 0; --i) nu0.add_atom(point1(gen.uniform(-0.999, 0.999)), gen.uniform(0.01, 0.3));
    nu0.add_atom(point1(0.9999), 0.2);
    const double M = gen.uniform(1, 5);
    auto probes = line_grid(-1.5, 1.5, 0.01);
    const auto r = thin_to_finite(k, kUnit, nu0, M, probes, {});
    CHECK(all_pass(r.checks));
    CHECK(dominated_by(r.measure, nu0));
    CHECK(all_pass(audit_thinning(k, r.trace, probes)));
    for (const auto& x : outside(SetSpec(Ball{point1(0), 1.0, false}), probes)) {
      CHECK(std::isfinite(potential(k, r.measure, x)));
    }
  }
}

TEST_CASE("localize keeps a single atom") {
  const auto k = KernelSpec::metric_power(1.0);
  const std::vector<Point> p{point1(0)};
  const auto audit = line_grid(-2, 2, 0.1);
  const auto r = localize(k, kUnit, p, DiscreteMeasure::dirac(point1(0), 0.1), 0.1, audit, {});
  CHECK(all_pass(r.checks));
  CHECK(r.measure.size() == 1);
  CHECK(r.measure.weight_at(point1(0)) == 0.1);
  CHECK(potential(k, r.measure, point1(0)) == kInfinity);
}

TEST_CASE("localize on two points") {
  const auto k = KernelSpec::metric_power(0.5);
  const std::vector<Point> p{point1(0), point1(1)};
  const auto U = make_set(Ball{point1(0.5), 1.0, false});
  // the level-29 optimum sits within 1e-12 of P; spend the whole budget instead
  const auto est = capacity_lp(k, p, p);
  const auto witness = witness_from_capacity(est, 0.1 / est.value * (1 - 1e-9));
  for (const auto& x : p) REQUIRE(potential(k, witness, x) > std::pow(9.0, 1.5) + 2.0);
  const auto exterior = outside(SetSpec(FinitePoints{p}), line_grid(-0.45, 1.45, 0.1));
  REQUIRE(exterior.size() == 20);
  const auto r = localize(k, U, p, witness, 0.1, exterior, {});
  CHECK(all_pass(r.checks));
  CHECK(r.measure.mass() <= witness.mass() * (1 + 1e-12));
  for (const auto& x : p) CHECK(potential(k, r.measure, x) > 2.0);
  for (const auto& x : exterior) {
    if (distance_to_support(r.measure, x) > 0.0) CHECK(std::isfinite(potential(k, r.measure, x)));
  }
  for (const auto& t : r.traces) CHECK(all_pass(audit_thinning(k, t, exterior)));
}

TEST_CASE("localize rejects a weak witness") {
  const auto k = KernelSpec::metric_power(1.0);
  const std::vector<Point> p{point1(0)};
  const auto weak = DiscreteMeasure::dirac(point1(0.5), 0.1);
  CHECK_THROWS_AS(localize(k, kUnit, p, weak, 0.1, {}, {}), InputError);
  CHECK_THROWS_AS(localize(k, kUnit, p, DiscreteMeasure::dirac(point1(0), 0.5), 0.1, {}, {}), InputError);
}

TEST_CASE("scatter keeps the potential small outside U") {
  const auto k = KernelSpec::metric_power(1.0);
  std::vector<Point> p{point1(0)};
  for (int j = 1; j <= 6; ++j) {
    p.push_back(point1(std::ldexp(1.0, -j)));
    p.push_back(point1(-std::ldexp(1.0, -j)));
  }
  const auto off_u = outside(SetSpec(Ball{point1(0), 1.0, false}), line_grid(-3, 3, 0.05));
  const auto r = scatter(k, kUnit, p, 0.1, off_u, {});
  CHECK(all_pass(r.checks));
  CHECK(r.measure.mass() <= 0.1);
  for (const auto& x : off_u) CHECK(potential(k, r.measure, x) < 0.1);
  for (const auto& x : p) CHECK(potential(k, r.measure, x) > 2.0);
  for (const auto& a : r.annuli) CHECK(a.mass <= a.budget * (1 + 1e-12));
  for (const auto& t : r.traces) CHECK(all_pass(audit_thinning(k, t, off_u)));
}

TEST_CASE("dense carrier for a single point") {
  const auto k = KernelSpec::metric_power(1.0);
  const std::vector<Point> p{point1(0)};
  const auto off_u = outside(SetSpec(Ball{point1(0), 1.0, false}), line_grid(-3, 3, 0.05));
  const auto r = dense_carrier(k, p, p, kUnit, 0.25, off_u, {});
  CHECK(all_pass(r.checks));
  REQUIRE(r.measure.size() == 1);
  CHECK(r.measure.atoms().front().point == point1(0));
  CHECK(r.measure.mass() <= 0.25);
  for (const auto& x : off_u) CHECK(potential(k, r.measure, x) < 0.25);
}

TEST_CASE("dense carrier lands on a dense sample") {
  const auto k = KernelSpec::metric_power(1.0);
  const std::vector<Point> p{point1(-0.25), point1(0), point1(0.25)};
  const auto P0 = line_grid(-0.5, 0.5, 1.0 / 512);
  const auto off_u = outside(SetSpec(Ball{point1(0), 1.0, false}), line_grid(-3, 3, 0.05));
  const auto r = dense_carrier(k, p, P0, kUnit, 0.25, off_u, {});
  CHECK(all_pass(r.checks));
  for (const auto& a : r.measure.atoms()) {
    CHECK(std::any_of(P0.begin(), P0.end(), [&](const Point& q) { return same_point(q, a.point); }));
  }
  for (const auto& x : p) CHECK(potential(k, r.measure, x) > 1.0);
}

TEST_CASE("choquet measure of a point is a Dirac") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto P = GDeltaSpec::around(SetSpec(FinitePoints{{point1(0)}}), 1.0 / 3.0);
  const std::vector<Point> p{point1(0)};
  const auto exterior = outside(SetSpec(Ball{point1(0), 0.05, false}), line_grid(-1, 1, 0.05));
  for (int depth = 1; depth <= 4; ++depth) {
    const auto r = choquet_measure(k, P, depth, p, p, exterior, {});
    CHECK(all_pass(r.checks));
    REQUIRE(r.measure.size() == 1);
    CHECK(r.measure.atoms().front().point == point1(0));
    CHECK(r.p_min == kInfinity);
    CHECK(r.measure.mass() <= 1.0 - std::ldexp(1.0, -depth));
    for (const auto& e : r.exterior) CHECK(e.value <= e.bound);
    CHECK(superlevel_open(k, r.measure, line_grid(-1, 1, 0.01), 3.0, 0.01));
  }
}

TEST_CASE("choquet measure of the cantor G delta") {
  const auto k = KernelSpec::metric_power(0.8);
  const auto P = GDeltaSpec::cantor(1.0 / 3.0);
  const auto p = sample_set(SetSpec(Cantor{4, 0.0, 1.0}), 0.01);
  const SetSpec carrier(Cantor{4, 0.0, 1.0});
  const auto exterior = line_grid(-1, 2, 0.05);
  std::vector<Point> far;
  for (const auto& x : exterior) {
    if (distance_to_set(carrier, x) >= 0.05) far.push_back(x);
  }
  const int depth = 3;
  const auto r = choquet_measure(k, P, depth, p, p, far, {});
  CHECK(all_pass(r.checks));
  CHECK(r.p_min >= depth);
  CHECK(r.measure.mass() <= 1.0 - std::ldexp(1.0, -depth));
  for (std::size_t i = 0; i < r.levels.size(); ++i) CHECK(r.levels[i].mass <= std::ldexp(1.0, -r.levels[i].m));
  for (const auto& a : r.measure.atoms()) CHECK(std::any_of(p.begin(), p.end(), [&](const Point& q) { return same_point(q, a.point); }));
  for (const auto& e : r.exterior) {
    CHECK(std::isfinite(e.value));
    CHECK(e.value <= e.bound);
  }
  for (const auto& t : r.traces) CHECK(all_pass(audit_thinning(k, t, far)));
  for (int n = 1; n <= 3; ++n) CHECK(superlevel_open(k, r.measure, away_from(r.measure, exterior, 1e-9), n, 0.05));
}

TEST_CASE("choquet input validation") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto P = GDeltaSpec::around(SetSpec(FinitePoints{{point1(0)}}));
  const std::vector<Point> p{point1(0)};
  CHECK_THROWS_AS(choquet_measure(k, P, 0, p, p, {}, {}), InputError);
  CHECK_THROWS_AS(choquet_measure(k, P, 2, {}, p, {}, {}), InputError);
  CHECK_THROWS_AS(scatter(k, kUnit, std::vector<Point>{point1(2)}, 0.1, {}, {}), InputError);
}
