#include <doctest.h>

#include "polarset/capacity.hpp"
#include "support/generators.hpp"
#include "support/lp_oracle.hpp"

#include <cmath>

using namespace polarset;

namespace {

// max c'x s.t. A x <= b, x >= 0 over the basic solutions.
double simplex_oracle(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& c) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  Eigen::MatrixXd rows(m + n, n);
  Eigen::VectorXd rhs(m + n);
  rows << A, -Eigen::MatrixXd::Identity(n, n);
  rhs << b, Eigen::VectorXd::Zero(n);
  double best = -kInfinity;
  for (unsigned mask = 0; mask < (1u << (m + n)); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    Eigen::MatrixXd S(n, n);
    Eigen::VectorXd s(n);
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < m + n; ++i) {
      if (mask & (1u << i)) {
        S.row(r) = rows.row(i);
        s[r++] = rhs[i];
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
    if (lu.rank() < n) continue;
    const Eigen::VectorXd x = lu.solve(s);
    if (((rows * x - rhs).array() > 1e-10).any()) continue;
    best = std::max(best, c.dot(x));
  }
  return best;
}

}  // namespace

TEST_CASE("simplex agrees with vertex enumeration") {
  testing::Gen gen(41);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = gen.integer(1, 4);
    const int n = gen.integer(1, 4);
    Eigen::MatrixXd A(m, n);
    Eigen::VectorXd b(m);
    Eigen::VectorXd c(n);
    for (int i = 0; i < m; ++i) {
      b[i] = gen.uniform(0, 3);
      for (int j = 0; j < n; ++j) A(i, j) = gen.uniform(0.05, 2);
    }
    for (int j = 0; j < n; ++j) c[j] = gen.uniform(-1, 2);
    const auto res = simplex_maximize<double>(A, b, c);
    CHECK(res.objective == doctest::Approx(simplex_oracle(A, b, c)).epsilon(1e-9));
    CHECK(((A * res.x - b).array() <= 1e-9).all());
    CHECK((res.x.array() >= 0).all());
    CHECK((res.duals.array() >= -1e-12).all());
    // strong duality
    CHECK(b.dot(res.duals) == doctest::Approx(res.objective).epsilon(1e-9));
  }
}

TEST_CASE("simplex reports unbounded problems") {
  Eigen::MatrixXd A(1, 2);
  A << 1, -1;
  Eigen::VectorXd b(1);
  b << 1;
  Eigen::VectorXd c(2);
  c << 0, 1;
  CHECK_THROWS_AS(simplex_maximize<double>(A, b, c), BudgetError);
}

TEST_CASE("closed-form capacities") {
  const auto k = KernelSpec::metric_power(1.0, 1e6);
  const std::vector<Point> a{point1(0)};
  const auto self = capacity_lp(k, a, a);
  CHECK(self.value == 1.0 / 1e6);
  CHECK(self.optimal_measure.weight_at(point1(0)) == 1.0 / 1e6);

  const std::vector<Point> y{point1(0.25)};
  CHECK(capacity_lp(k, a, y).value == doctest::Approx(0.25));
}

TEST_CASE("riesz capacity of the cube vertices matches the oracle") {
  const auto k = KernelSpec::riesz(2.0, 3);
  std::vector<Point> target;
  for (int i = 0; i < 8; ++i) target.push_back(point3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
  auto support = target;
  support.push_back(point3(0.5, 0.5, 0.5));
  const auto est = capacity_lp(k, target, support);
  // by symmetry the optimum is a combination of equal vertex weights and a center weight
  const Eigen::MatrixXd K = kernel_matrix(k, target, support, true);
  const double row_vertices = K.row(0).head(8).sum();
  const double center = K(0, 8);
  const double oracle = std::min(8.0 / row_vertices, 1.0 / center);
  CHECK(est.value == doctest::Approx(oracle).epsilon(1e-9));
  CHECK(est.constraint_gap >= -1e-9);
  CHECK(est.dual_value == doctest::Approx(est.value).epsilon(1e-12));
}

TEST_CASE("capacity matches the vertex oracle on small instances") {
  testing::Gen gen(42);
  for (int trial = 0; trial < 300; ++trial) {
    const int dim = gen.integer(1, 3);
    const auto k = gen.uniform() < 0.5 ? KernelSpec::metric_power(gen.uniform(0.3, 2.0), gen.uniform(5, 100))
                                       : KernelSpec::riesz(gen.uniform(0.2, 0.9) * dim, dim, gen.uniform(5, 100));
    const auto target = gen.cloud(static_cast<std::size_t>(gen.integer(1, 4)), dim, 0, 1);
    auto support = gen.cloud(static_cast<std::size_t>(gen.integer(1, 4)), dim, 0, 1);
    if (gen.uniform() < 0.5) support.front() = target.front();
    const auto est = capacity_lp(k, target, support);
    CHECK(est.value == doctest::Approx(testing::lp_vertex_oracle(k, target, support)).epsilon(1e-6));
    CHECK(est.value == doctest::Approx(est.optimal_measure.mass()).epsilon(1e-12));
    for (Eigen::Index i = 0; i < est.constraint_values.size(); ++i) CHECK(est.constraint_values[i] >= 1 - 1e-9);
  }
}

TEST_CASE("capacity scales inversely with the kernel") {
  testing::Gen gen(43);
  for (int trial = 0; trial < 50; ++trial) {
    const double gamma = gen.uniform(0.3, 2.0);
    const double c = gen.uniform(0.1, 10.0);
    const auto k = KernelSpec::metric_power(gamma, 1e6);
    const auto kc = KernelSpec::custom(
        "scaled", [gamma, c](double r) { return c * std::pow(r, -gamma); }, gamma, c * 1e6);
    const auto target = gen.cloud(static_cast<std::size_t>(gen.integer(1, 10)), 2, 0, 1);
    const auto support = gen.cloud(static_cast<std::size_t>(gen.integer(1, 10)), 2, 0, 1);
    const double base = capacity_lp(k, target, support).value;
    CHECK(std::abs(capacity_lp(kc, target, support).value - base / c) <= 1e-9 * base / c);
  }
}

TEST_CASE("adding targets never decreases the capacity") {
  testing::Gen gen(44);
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = KernelSpec::metric_power(1.0, 100.0);
    auto target = gen.cloud(6, 2, 0, 1);
    const auto support = gen.cloud(5, 2, 0, 1);
    const double all = capacity_lp(k, target, support).value;
    target.pop_back();
    CHECK(capacity_lp(k, target, support).value <= all * (1 + 1e-12));
  }
}

TEST_CASE("witnesses scale linearly") {
  const auto k = KernelSpec::metric_power(1.0, 1e6);
  const std::vector<Point> a{point1(0)};
  const auto one = witness_from_capacity(k, a, a, 1.0);
  CHECK(one.mass() == doctest::Approx(1e-6));
  const auto full = witness_from_capacity(k, a, a, 1e6);
  CHECK(full.mass() == doctest::Approx(1.0));
  CHECK(truncated_potential(k, full, point1(0)) >= 1e6 * (1 - 1e-9));

  const auto segment = sample_set(SetSpec(Segment{point1(0), point1(1e-4)}), 1e-5);
  const auto est = capacity_lp(k, segment, segment);
  for (int m = 1; m <= 4; ++m) {
    if (est.value > std::ldexp(1.0, -2 * m)) continue;
    const auto w = witness_from_capacity(est, std::ldexp(1.0, m));
    CHECK(w.mass() <= std::ldexp(1.0, -m));
    for (const auto& x : segment) CHECK(truncated_potential(k, w, x) >= std::ldexp(1.0, m) * (1 - 1e-9));
  }
}

TEST_CASE("null capacity series") {
  const auto k = KernelSpec::metric_power(1.0, 1e6);
  const std::vector<Point> a{point1(0)};
  CHECK(null_capacity_series(k, a, a, 0).measure.empty());
  const auto s = null_capacity_series(k, a, a, 10);
  CHECK(s.measure.mass() <= 1.0);
  CHECK(s.target_min >= 10.0);
  CHECK(truncated_potential(k, s.measure, point1(0)) >= 10.0);
  CHECK(s.levels.size() == 10);

  double previous = 0.0;
  for (int M = 1; M <= 6; ++M) {
    const auto sm = null_capacity_series(k, a, a, M);
    CHECK(sm.target_min >= previous);
    CHECK(sm.measure.mass() <= 1.0 - std::ldexp(1.0, -M));
    previous = sm.target_min;
  }

  // charging the unit segment from one distant site costs mass 3 per unit level
  const auto seg = sample_set(SetSpec(Segment{point1(0), point1(1)}), 0.1);
  const std::vector<Point> site{point1(3)};
  CHECK(capacity_lp(k, seg, site).value == doctest::Approx(3.0));
  CHECK_THROWS_AS(null_capacity_series(k, seg, site, 3), BudgetError);
}
