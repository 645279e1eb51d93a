#include <doctest.h>

#include "polarset/sweep.hpp"
#include "support/generators.hpp"

#include <cmath>

using namespace polarset;

TEST_CASE("shell partition examples") {
  const SetSpec origin(FinitePoints{{point1(0)}});
  const std::vector<Point> a0{point1(0)};
  const auto p = shell_partition(origin, a0, DiscreteMeasure::dirac(point1(3.5)), 1.0);
  REQUIRE(p.blocks.size() == 1);
  CHECK(p.blocks[0].center == point1(0));
  CHECK(p.blocks[0].part.mass() == 1.0);
  CHECK(shell_partition(origin, a0, DiscreteMeasure{}, 1.0).blocks.empty());

  const SetSpec unit(Segment{point1(0), point1(1)});
  const std::vector<Point> mid{point1(0.5)};
  const auto q = shell_partition(unit, mid, DiscreteMeasure::dirac(point1(4.5)), 1.0);
  REQUIRE(q.blocks.size() == 1);
  CHECK(q.blocks[0].center == point1(0.5));

  CHECK_THROWS_AS(shell_partition(origin, a0, DiscreteMeasure::dirac(point1(5.0)), 1.0), InputError);
  const std::vector<Point> far{point1(10)};
  CHECK_THROWS_AS(shell_partition(origin, far, DiscreteMeasure::dirac(point1(3.5)), 1.0), InputError);
}

TEST_CASE("sweep examples") {
  const auto k = KernelSpec::metric_power(1.0);
  const SetSpec origin(FinitePoints{{point1(0)}});
  const auto r = sweep_off_set(k, origin, std::vector<Point>{point1(0)}, DiscreteMeasure::dirac(point1(3.5)));
  CHECK(r.measure.weight_at(point1(0)) == 1.0);
  CHECK(potential(k, r.measure, point1(0)) == kInfinity);

  const SetSpec unit(Segment{point1(0), point1(1)});
  const auto s = sweep_off_set(k, unit, std::vector<Point>{point1(0.5)}, DiscreteMeasure::dirac(point1(4.5)));
  CHECK(s.measure.weight_at(point1(0.5)) == 1.0);
  CHECK(potential(k, s.measure, point1(0)) == doctest::Approx(2.0));
  CHECK(s.guaranteed_factor == doctest::Approx(1.0 / 3.0));

  CHECK_THROWS_AS(sweep_off_set(k, unit, std::nullopt, DiscreteMeasure::dirac(point1(0.5))), InputError);
}

TEST_CASE("sweep_to_closed keeps atoms on the set") {
  const auto k = KernelSpec::metric_power(1.0);
  const SetSpec unit(Segment{point1(0), point1(1)});
  DiscreteMeasure on;
  on.add_atom(point1(0.25), 0.5);
  on.add_atom(point1(1), 0.5);
  const auto same = sweep_to_closed(k, unit, on);
  CHECK(same.measure.size() == 2);
  CHECK(same.measure.weight_at(point1(0.25)) == 0.5);

  auto mixed = on;
  mixed.add_atom(point1(3), 0.25);
  const auto r = sweep_to_closed(k, unit, mixed);
  CHECK(r.measure.weight_at(point1(0.25)) == 0.5);
  CHECK(r.measure.weight_at(point1(1)) == 0.75);
  CHECK(r.measure.mass() == mixed.mass());
}

TEST_CASE("sweep factors") {
  CHECK(sweep_factor(1.0) == doctest::Approx(1.0 / 3.0));
  CHECK(sweep_factor(2.0) == doctest::Approx(1.0 / 9.0));
  CHECK(sweep_factor(1.0, 10.0) == doctest::Approx(1.0 / 2.2));
  CHECK(sweep_factor(1.0, 100.0) > sweep_factor(1.0, 10.0));
}

TEST_CASE("sweep inequality, mass and geometric core on random instances") {
  testing::Gen gen(51);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = gen.integer(1, 3);
    const double gamma = gen.pick(std::vector<double>{0.5, 1.0, 1.5});
    const auto k = KernelSpec::metric_power(gamma);
    const auto a = gen.closed_primitive(dim);
    const auto mu = gen.measure_off(a, dim, gen.integer(1, 30));
    const bool dense = gen.uniform() < 0.5;
    std::optional<std::vector<Point>> a0;
    if (dense) a0 = sample_set(a, 0.05);
    const auto r = sweep_off_set(k, a, a0, mu);
    CHECK(r.measure.mass() == doctest::Approx(mu.mass()).epsilon(1e-12));
    const auto probes = sample_set(a, 0.1);
    for (const auto& x : probes) {
      const double gn = potential(k, r.measure, x);
      const double gm = potential(k, mu, x);
      CHECK(gn >= std::pow(3.0, -gamma) * gm);
    }
    for (const auto& s : r.assignments) {
      CHECK(contains(a, s.center));
      CHECK(distance(s.atom, s.center) < 5 * s.radius);
      for (const auto& x : probes) CHECK(distance(x, s.center) < 3 * distance(x, s.atom));
    }
    for (const auto& atom : r.measure.atoms()) CHECK(distance_to_set(a, atom.point) <= 1e-12);
  }
}

TEST_CASE("wider shells keep the chain constant") {
  testing::Gen gen(52);
  for (int trial = 0; trial < 50; ++trial) {
    const double base = gen.uniform(3.5, 12.0);
    const auto k = KernelSpec::metric_power(1.0);
    const auto a = gen.closed_primitive(2);
    const auto mu = gen.measure_off(a, 2, 10);
    const auto r = sweep_off_set(k, a, std::nullopt, mu, base);
    const double chain = 1.0 + (base + 2.0) / base;
    CHECK(r.guaranteed_factor == doctest::Approx(std::pow(chain, -1.0)));
    for (const auto& x : sample_set(a, 0.05)) {
      CHECK(potential(k, r.measure, x) >= r.guaranteed_factor * potential(k, mu, x) * (1 - 1e-12));
    }
  }
}

TEST_CASE("discrete approximation") {
  DiscreteMeasure mu = DiscreteMeasure::dirac(point1(0.3));
  const std::vector<Point> a0{point1(0), point1(0.5)};
  const auto approx = discrete_approximation(mu, a0, 3);
  CHECK(approx.size() == 1);
  CHECK(approx.weight_at(point1(0)) == 1.0);
  CHECK_THROWS_AS(discrete_approximation(mu, a0, 10), InputError);

  const std::vector<Point> on{point1(0.3), point1(0)};
  CHECK(discrete_approximation(mu, on, 1).weight_at(point1(0.3)) == 1.0);
}

TEST_CASE("discrete approximations converge away from the support") {
  testing::Gen gen(53);
  const auto k = KernelSpec::metric_power(1.0);
  DiscreteMeasure mu;
  for (int i = 0; i < 20; ++i) mu.add_atom(point1(gen.uniform(0, 1)), gen.uniform(0.1, 1));
  const auto a0 = grid_points(point1(0), point1(1), 1.0 / 4096);
  std::vector<Point> probes;
  for (int i = 0; i < 50; ++i) probes.push_back(point1(gen.uniform(2, 5)));
  double previous = kInfinity;
  for (int n = 4; n <= 2048; n *= 2) {
    const auto mn = discrete_approximation(mu, a0, n);
    CHECK(mn.mass() == doctest::Approx(mu.mass()).epsilon(1e-14));
    double worst = 0.0;
    for (const auto& x : probes) worst = std::max(worst, std::abs(potential(k, mn, x) - potential(k, mu, x)));
    // kernel modulus at distance >= 1 is 1/n per unit mass
    CHECK(worst <= mu.mass() / n * (1 + 1e-9));
    CHECK(worst <= previous);
    previous = worst;
  }
}

TEST_CASE("refine until the margin holds") {
  const auto k = KernelSpec::metric_power(1.0);
  const auto mu = DiscreteMeasure::dirac(point1(0.3));
  const std::vector<Point> a0 = grid_points(point1(0), point1(1), 1.0 / 1024);
  const std::vector<Point> probe{point1(2)};

  const std::vector<double> negative{-1.0};
  CHECK(refine_until(k, mu, probe, negative, a0, {}).n == 1);

  const std::vector<double> half{0.5};
  const auto r = refine_until(k, mu, probe, half, a0, {});
  CHECK(potential(k, r.measure, point1(2)) > 0.5);
  CHECK(r.worst_margin > 0.0);

  const std::vector<double> exact{potential(k, mu, point1(2))};
  const std::vector<Point> lattice{point1(0.3)};
  RefineOptions tight;
  tight.n_max = 64;
  CHECK_THROWS_AS(refine_until(k, mu, probe, exact, lattice, tight), BudgetError);
}
