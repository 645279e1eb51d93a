#include "polarset/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace polarset {

KernelSpec KernelSpec::riesz(double alpha, int dimension, double cap) {
  KernelSpec k;
  k.family = RieszFamily{alpha, dimension};
  k.gamma = dimension - alpha;
  k.cap = cap;
  k.validate();
  return k;
}

KernelSpec KernelSpec::metric_power(double gamma, double cap) {
  KernelSpec k;
  k.family = MetricPowerFamily{};
  k.gamma = gamma;
  k.cap = cap;
  k.validate();
  return k;
}

KernelSpec KernelSpec::log2d(double gamma, double cap) {
  KernelSpec k;
  k.family = Log2dFamily{};
  k.gamma = gamma;
  k.cap = cap;
  k.validate();
  return k;
}

KernelSpec KernelSpec::custom(std::string name, std::function<double(double)> profile, double gamma,
                              double cap) {
  KernelSpec k;
  k.family = CustomFamily{std::move(name), std::move(profile)};
  k.gamma = gamma;
  k.cap = cap;
  k.validate();
  return k;
}

void KernelSpec::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InputError("kernel: gamma must be positive");
  if (!(cap > 0.0) || !std::isfinite(cap)) throw InputError("kernel: cap must be positive and finite");
  if (const auto* r = std::get_if<RieszFamily>(&family)) {
    if (r->dimension < 1) throw InputError("kernel: riesz dimension must be >= 1");
    if (!(r->alpha > 0.0 && r->alpha < r->dimension)) {
      throw InputError("kernel: riesz requires 0 < alpha < N");
    }
  }
  if (const auto* c = std::get_if<CustomFamily>(&family)) {
    if (!c->profile) throw InputError("kernel: custom family without a profile");
  }
}

double KernelSpec::profile(double r) const {
  if (r <= kMergeTolerance) return kInfinity;
  return std::visit(
      [&](const auto& f) -> double {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, RieszFamily>) {
          return std::pow(r, f.alpha - f.dimension);
        } else if constexpr (std::is_same_v<F, MetricPowerFamily>) {
          return std::pow(r, -gamma);
        } else if constexpr (std::is_same_v<F, Log2dFamily>) {
          if (r > 0.5 + kMergeTolerance) {
            throw InputError("kernel: log2d evaluated at distance " + std::to_string(r) +
                             " > 1/2 (outside its local triangle domain)");
          }
          return std::log(2.0 / r);
        } else {
          return f.profile(r);
        }
      },
      family);
}

std::string KernelSpec::name() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, RieszFamily>) {
          os << "riesz(alpha=" << f.alpha << ",N=" << f.dimension << ")";
        } else if constexpr (std::is_same_v<F, MetricPowerFamily>) {
          os << "metric_power(gamma=" << gamma << ")";
        } else if constexpr (std::is_same_v<F, Log2dFamily>) {
          os << "log2d";
        } else {
          os << "custom(" << f.name << ")";
        }
      },
      family);
  return os.str();
}

namespace {

void check_dimensions(const KernelSpec& k, const Point& x, const Point& y) {
  if (x.size() != y.size()) throw InputError("kernel: dimension mismatch between points");
  if (const auto* r = std::get_if<RieszFamily>(&k.family)) {
    if (x.size() != r->dimension) {
      throw InputError("kernel: riesz kernel for N=" + std::to_string(r->dimension) +
                       " evaluated on points of dimension " + std::to_string(x.size()));
    }
  }
}

}  // namespace

double eval_kernel(const KernelSpec& k, const Point& x, const Point& y) {
  check_dimensions(k, x, y);
  return k.profile(distance(x, y));
}

double truncated_kernel(const KernelSpec& k, const Point& x, const Point& y) {
  return std::min(eval_kernel(k, x, y), k.cap);
}

double quasimetric(const KernelSpec& k, const Point& x, const Point& y) {
  // 1/inf = 0 on the diagonal.
  return 1.0 / eval_kernel(k, x, y) + 1.0 / eval_kernel(k, y, x);
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& k, std::span<const Point> rows,
                              std::span<const Point> cols, bool truncated) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          truncated ? truncated_kernel(k, rows[i], cols[j]) : eval_kernel(k, rows[i], cols[j]);
    }
  }
  return m;
}

TriangleReport triangle_constant(const KernelSpec& k, const PointCloud& cloud) {
  if (cloud.size() < 3) throw InputError("triangle_constant: need at least 3 points");
  cloud.validate();
  const Eigen::MatrixXd g = kernel_matrix(k, cloud.points, cloud.points, false);
  const auto n = static_cast<Eigen::Index>(cloud.size());

  TriangleReport report;
  double best = -1.0;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      const double gxy = g(x, y);
      for (Eigen::Index z = 0; z < n; ++z) {
        if (z == x || z == y) continue;
        const double ratio = std::min(g(x, z), g(y, z)) / gxy;
        if (ratio > best) {
          best = ratio;
          report.worst_triple = {static_cast<std::size_t>(x), static_cast<std::size_t>(y),
                                 static_cast<std::size_t>(z)};
        }
      }
    }
  }
  // The constant is reported as >= 1 (z = x in the continuum gives ratio 1 for symmetric G).
  report.constant_C = std::max(best, 1.0);
  report.gamma_min = 2.0 * std::log2(report.constant_C);
  return report;
}

DistanceTable chain_metric(const KernelSpec& k, const PointCloud& cloud, double gamma) {
  if (!(gamma > 0.0)) throw InputError("chain_metric: gamma must be positive");
  cloud.validate();
  const auto n = static_cast<Eigen::Index>(cloud.size());

  DistanceTable table;
  table.gamma = gamma;
  table.rho.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      table.rho(i, j) = quasimetric(k, cloud.points[static_cast<std::size_t>(i)],
                                    cloud.points[static_cast<std::size_t>(j)]);
    }
  }
  table.d = table.rho.array().pow(1.0 / gamma).matrix();
  table.d.diagonal().setZero();

  // Floyd-Warshall.
  for (Eigen::Index via = 0; via < n; ++via) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d_iv = table.d(i, via);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double through = d_iv + table.d(via, j);
        if (through < table.d(i, j)) table.d(i, j) = through;
      }
    }
  }

  if (cloud.size() >= 3) {
    table.below_gamma_min = gamma < triangle_constant(k, cloud).gamma_min;
  }
  return table;
}

double comparability_check(const KernelSpec& k, const PointCloud& cloud, const Eigen::MatrixXd& d,
                           double gamma) {
  const auto n = static_cast<Eigen::Index>(cloud.size());
  if (d.rows() != n || d.cols() != n) throw InputError("comparability_check: table size mismatch");
  double worst = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double g = eval_kernel(k, cloud.points[static_cast<std::size_t>(i)],
                                   cloud.points[static_cast<std::size_t>(j)]);
      const double scaled = g * std::pow(d(i, j), gamma);
      if (!(scaled > 0.0) || !std::isfinite(scaled)) return kInfinity;
      worst = std::max({worst, scaled, 1.0 / scaled});
    }
  }
  return worst;
}

double max_triangle_violation(const Eigen::MatrixXd& d) {
  const Eigen::Index n = d.rows();
  double worst = -kInfinity;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      const double d_xy = d(x, y);
      for (Eigen::Index z = 0; z < n; ++z) {
        const double lhs = d(x, z);
        const double slack = lhs - (d_xy + d(y, z));
        const double scale = std::max(lhs, 1e-300);
        worst = std::max(worst, slack / scale);
      }
    }
  }
  return worst;
}

}  // namespace polarset
