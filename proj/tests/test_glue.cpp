#include <doctest.h>

#include "polarset/glue.hpp"

#include <cmath>

using namespace polarset;

namespace {

bool same_atoms(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.atoms()[i].point != b.atoms()[i].point || a.atoms()[i].weight != b.atoms()[i].weight) return false;
  }
  return true;
}

std::vector<Point> exterior_of_origin() {
  std::vector<Point> out;
  for (const auto& x : grid_points(point1(-1), point1(1), 0.05)) {
    if (std::abs(x[0]) >= 0.05) out.push_back(x);
  }
  return out;
}

}  // namespace

TEST_CASE("a small domain gets one chart") {
  const SetSpec domain(Segment{point1(0), point1(0.3)});
  const auto charts = local_cover(domain, KernelSpec::metric_power(1.0), 0.5);
  REQUIRE(charts.size() == 1);
  CHECK(charts[0].n == 1);
  CHECK(charts[0].covers_domain);
  CHECK(charts[0].neighbors == std::vector<int>{0});
}

TEST_CASE("unit square cover") {
  const SetSpec square(Box{point2(0, 0), point2(1, 1), true});
  CoverOptions opts;
  opts.spacing = 0.25;
  const auto charts = local_cover(square, KernelSpec::metric_power(1.0), 0.4, opts);
  CHECK(charts.size() == 16);
  for (const auto& c : charts) {
    CHECK(c.neighbors.size() <= 21);
    CHECK(std::find(c.neighbors.begin(), c.neighbors.end(), c.n - 1) != c.neighbors.end());
  }
  // open balls meet exactly when their midpoint lies in both
  for (std::size_t i = 0; i < charts.size(); ++i) {
    for (std::size_t j = 0; j < charts.size(); ++j) {
      const Point mid = 0.5 * (charts[i].center + charts[j].center);
      const bool meet = contains(*charts[i].open(), mid) && contains(*charts[j].open(), mid);
      const auto& nb = charts[i].neighbors;
      CHECK(meet == (std::find(nb.begin(), nb.end(), static_cast<int>(j)) != nb.end()));
    }
  }
  for (const auto& x : sample_set(square, 0.02)) {
    CHECK(std::any_of(charts.begin(), charts.end(), [&](const Chart& c) { return contains(*c.open(), x); }));
  }
}

TEST_CASE("log kernel certifies on a small domain") {
  const SetSpec domain(Box{point2(0.1, 0.1), point2(0.38, 0.38), true});
  const auto charts = local_cover(domain, KernelSpec::log2d(), 0.25);
  REQUIRE(charts.size() == 1);
  CHECK(charts[0].triangle.constant_C < 16.0);
  CHECK(charts[0].samples > 0);
}

TEST_CASE("a chart failing certification is named") {
  const SetSpec domain(Segment{point1(0), point1(1)});
  CoverOptions opts;
  opts.max_constant = 0.5;
  CHECK_THROWS_WITH_AS(local_cover(domain, KernelSpec::metric_power(1.0), 0.4, opts), doctest::Contains("chart 1"),
                       InputError);
  CHECK_THROWS_AS(local_cover(domain, KernelSpec::metric_power(1.0), 0.0), InputError);
}

TEST_CASE("chart weights") {
  const auto w = chart_weights(5);
  double sum = 0.0;
  for (double x : w) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] == doctest::Approx(w[i - 1] / 2));
  CHECK(chart_weights(1) == std::vector<double>{1.0});
}

TEST_CASE("one chart reproduces the evans measure") {
  const auto k = KernelSpec::metric_power(0.5);
  const auto P = FSigmaSpec::from_pieces({SetSpec(FinitePoints{{point1(0), point1(0.2)}})});
  const auto charts = local_cover(SetSpec(Segment{point1(0), point1(0.2)}), k, 0.5);
  REQUIRE(charts.size() == 1);
  EvansOptions opts;
  opts.depth = 4;
  const auto glued = glue_evans(k, P, charts, opts);
  const auto plain = evans_measure(k, P, opts);
  CHECK(same_atoms(glued.measure, plain.measure));
  CHECK(all_pass(glued.checks));
}

TEST_CASE("evans across several charts") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto P = FSigmaSpec::from_pieces({SetSpec(FinitePoints{{point2(0.2, 0.2), point2(0.8, 0.7)}})});
  CoverOptions cover;
  cover.spacing = 0.25;
  const auto charts = local_cover(SetSpec(Box{point2(0, 0), point2(1, 1), true}), k, 0.4, cover);
  EvansOptions opts;
  opts.depth = 4;
  const auto r = glue_evans(k, P, charts, opts);
  CHECK(all_pass(r.checks));
  CHECK(r.measure.mass() <= 1.0);
  std::size_t used = 0;
  for (std::size_t n = 0; n < charts.size(); ++n) {
    if (!r.charts[n]) continue;
    ++used;
    const auto& chart = *r.charts[n];
    for (const auto& x : chart.probes) {
      CHECK(truncated_potential(k, r.measure, x) >= r.weights[n] * chart.probe_min * (1 - 1e-12));
    }
  }
  CHECK(used >= 2);
}

TEST_CASE("one chart reproduces the choquet measure") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto P = GDeltaSpec::around(SetSpec(FinitePoints{{point1(0)}}), 1.0 / 3.0);
  const std::vector<Point> p{point1(0)};
  const auto exterior = exterior_of_origin();
  const auto charts = local_cover(SetSpec(Segment{point1(-1), point1(1)}), k, 2.0);
  REQUIRE(charts.size() == 1);
  const auto glued = glue_choquet(k, P, 3, p, p, exterior, charts, {});
  const auto plain = choquet_measure(k, P, 3, p, p, exterior, {});
  CHECK(same_atoms(glued.measure, plain.measure));
  CHECK(all_pass(glued.checks));
}

TEST_CASE("choquet across two charts diverges only at the point") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto P = GDeltaSpec::around(SetSpec(FinitePoints{{point1(0)}}), 1.0 / 3.0);
  const std::vector<Point> p{point1(0)};
  const auto exterior = exterior_of_origin();
  CoverOptions cover;
  cover.spacing = 1.0;
  const auto charts = local_cover(SetSpec(Segment{point1(-1), point1(1)}), k, 0.75, cover);
  REQUIRE(charts.size() == 2);
  const auto r = glue_choquet(k, P, 3, p, p, exterior, charts, {});
  CHECK(all_pass(r.checks));
  CHECK(r.p_min == kInfinity);
  for (const auto& e : r.exterior) {
    CHECK(std::isfinite(e.value));
    CHECK(e.value <= e.near + e.far);
  }
  CHECK(assembled_neighborhoods_decrease(P, charts, 5, grid_points(point1(-1), point1(1), 0.01)));
}
