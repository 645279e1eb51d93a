#include "polarset/glue.hpp"

#include "polarset/parallel.hpp"

#include <sstream>

namespace polarset {

namespace {

std::string chart_tag(int n) { return "chart " + std::to_string(n); }

template <class F>
auto in_chart(int n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const BudgetError& e) {
    throw BudgetError(chart_tag(n) + ": " + e.what());
  } catch (const InputError& e) {
    throw InputError(chart_tag(n) + ": " + e.what());
  }
}

GDeltaSpec chart_gdelta(const GDeltaSpec& P, const Chart& c) {
  GDeltaSpec out = P;
  if (!c.covers_domain) {
    out.clip = P.clip ? make_set(Intersection{{P.clip, c.open()}}) : c.open();
  }
  return out;
}

std::vector<Point> inside(std::span<const Point> points, const Chart& c) {
  std::vector<Point> out;
  for (const auto& p : points) {
    if (c.covers_domain || distance(p, c.center) < c.radius) out.push_back(p);
  }
  return out;
}

}  // namespace

std::vector<Chart> local_cover(const SetSpec& domain, const KernelSpec& k, double chart_radius,
                               const CoverOptions& opts) {
  if (!(chart_radius > 0.0)) throw InputError("cover: chart radius must be positive");
  const double spacing = opts.spacing > 0.0 ? opts.spacing : 0.8 * chart_radius;
  const double resolution = opts.resolution > 0.0 ? opts.resolution : spacing / 4.0;
  const auto samples = sample_set(domain, resolution);
  if (samples.empty()) throw InputError("cover: the domain has no samples");
  const auto dim = samples.front().size();
  Point lo = samples.front();
  Point hi = samples.front();
  for (const auto& p : samples) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  std::vector<Point> centers;
  if ((hi - lo).norm() / 2.0 < chart_radius) {
    centers.push_back((lo + hi) / 2.0);
  } else {
    std::vector<int> counts(static_cast<std::size_t>(dim));
    std::vector<double> start(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double width = hi[i] - lo[i];
      const int c = std::max(1, static_cast<int>(std::ceil(width / spacing - 1e-12)));
      counts[static_cast<std::size_t>(i)] = c;
      start[static_cast<std::size_t>(i)] = lo[i] - (c * spacing - width) / 2.0 + spacing / 2.0;
    }
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    for (;;) {
      Point c(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        c[i] = start[static_cast<std::size_t>(i)] + idx[static_cast<std::size_t>(i)] * spacing;
      }
      if (distance_to_set(domain, c) < chart_radius) centers.push_back(c);
      std::size_t axis = 0;
      while (axis < idx.size() && ++idx[axis] == counts[axis]) idx[axis++] = 0;
      if (axis == idx.size()) break;
    }
  }

  std::vector<Chart> charts(centers.size());
  for (std::size_t n = 0; n < centers.size(); ++n) {
    auto& c = charts[n];
    c.n = static_cast<int>(n) + 1;
    c.center = centers[n];
    c.radius = chart_radius;
    double corner = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double a = std::max(std::abs(lo[i] - c.center[i]), std::abs(hi[i] - c.center[i]));
      corner += a * a;
    }
    c.covers_domain = std::sqrt(corner) < chart_radius;
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (distance(centers[j], centers[n]) < 2.0 * chart_radius) c.neighbors.push_back(static_cast<int>(j));
    }
  }
  for (const auto& p : samples) {
    const bool covered =
        std::any_of(charts.begin(), charts.end(), [&](const Chart& c) { return distance(p, c.center) < c.radius; });
    if (!covered) throw InputError("cover: a domain sample lies in no chart");
  }

  parallel_for(charts.size(), [&](std::size_t n) {
    auto& c = charts[n];
    PointCloud cloud;
    for (const auto& p : samples) {
      if (distance(p, c.center) <= c.radius) cloud.points.push_back(p);
    }
    c.samples = cloud.size();
    if (cloud.size() < 3) return;
    c.triangle = in_chart(c.n, [&] { return triangle_constant(k, cloud); });
    if (!(c.triangle.constant_C <= opts.max_constant)) {
      std::ostringstream os;
      os << chart_tag(c.n) << ": triangle constant " << c.triangle.constant_C << " exceeds " << opts.max_constant;
      throw InputError(os.str());
    }
  });
  return charts;
}

std::vector<double> chart_weights(std::size_t count) {
  const double total = 1.0 - std::ldexp(1.0, -static_cast<int>(count));
  std::vector<double> w(count);
  for (std::size_t n = 0; n < count; ++n) w[n] = std::ldexp(1.0, -static_cast<int>(n) - 1) / total;
  return w;
}

GlueEvansResult glue_evans(const KernelSpec& k, const FSigmaSpec& P, const std::vector<Chart>& charts,
                           const EvansOptions& opts) {
  if (charts.empty()) throw InputError("glue: no charts");
  GlueEvansResult out;
  out.weights = chart_weights(charts.size());
  out.charts = parallel_map<std::optional<EvansResult>>(charts.size(), [&](std::size_t n) {
    const auto& c = charts[n];
    return in_chart(c.n, [&]() -> std::optional<EvansResult> {
      FSigmaSpec Pn = P;
      if (!c.covers_domain) {
        const auto ball = c.closed();
        Pn.piece = [P, ball](int m) { return SetSpec(Intersection{{make_set(P.piece(m).shape()), ball}}); };
        int empty = 0;
        for (int m = 1; m <= opts.depth; ++m) {
          if (sample_set(Pn.piece(m), opts.resolution).empty()) ++empty;
        }
        if (empty == opts.depth) return std::nullopt;
        if (empty > 0) throw InputError("some pieces miss the chart while others meet it");
      }
      return evans_measure(k, Pn, opts);
    });
  });

  out.probe_min = kInfinity;
  for (std::size_t n = 0; n < charts.size(); ++n) {
    if (out.charts[n]) out.measure = add(out.measure, scale(out.charts[n]->measure, out.weights[n]));
  }
  for (std::size_t n = 0; n < charts.size(); ++n) {
    if (!out.charts[n]) continue;
    const auto& r = *out.charts[n];
    const auto tag = chart_tag(charts[n].n);
    for (auto c : r.checks) {
      c.name = tag + ": " + c.name;
      out.checks.push_back(std::move(c));
    }
    double bound = kInfinity;
    for (const auto& p : r.pieces) bound = std::min(bound, p.bound);
    const double glued = potential_field(k, out.measure, r.probes, true).min();
    out.probe_min = std::min(out.probe_min, glued);
    out.checks.push_back(check_ge(tag + ": glued probe minimum", glued, out.weights[n] * bound * (1.0 - 1e-12)));
  }
  bool supported = true;
  for (const auto& a : out.measure.atoms()) {
    bool hit = false;
    for (int m = 1; m <= opts.depth && !hit; ++m) hit = contains(P.piece(m), a.point);
    supported = supported && hit;
  }
  out.checks.push_back(check_true("support in P", supported));
  out.checks.push_back(check_le("total mass", out.measure.mass(), 1.0));
  return out;
}

GlueChoquetResult glue_choquet(const KernelSpec& k, const GDeltaSpec& P, int depth, std::span<const Point> p_probes,
                               std::span<const Point> P0, std::span<const Point> exterior_probes,
                               const std::vector<Chart>& charts, const ChoquetOptions& opts) {
  if (charts.empty()) throw InputError("glue: no charts");
  GlueChoquetResult out;
  out.weights = chart_weights(charts.size());
  out.charts = parallel_map<std::optional<ChoquetResult>>(charts.size(), [&](std::size_t n) {
    const auto& c = charts[n];
    return in_chart(c.n, [&]() -> std::optional<ChoquetResult> {
      const auto pn = inside(p_probes, c);
      if (pn.empty()) return std::nullopt;
      return choquet_measure(k, chart_gdelta(P, c), depth, pn, inside(P0, c), exterior_probes, opts);
    });
  });

  for (std::size_t n = 0; n < charts.size(); ++n) {
    if (out.charts[n]) out.measure = add(out.measure, scale(out.charts[n]->measure, out.weights[n]));
  }
  out.p_min = potential_field(k, out.measure, p_probes).min();
  for (std::size_t n = 0; n < charts.size(); ++n) {
    if (!out.charts[n]) continue;
    const auto& r = *out.charts[n];
    const auto tag = chart_tag(charts[n].n);
    for (auto c : r.checks) {
      c.name = tag + ": " + c.name;
      out.checks.push_back(std::move(c));
    }
    const auto pn = inside(p_probes, charts[n]);
    out.checks.push_back(check_ge(tag + ": glued divergence", potential_field(k, out.measure, pn).min(),
                                  out.weights[n] * r.p_min));
  }

  double worst = kInfinity;
  for (std::size_t i = 0; i < exterior_probes.size(); ++i) {
    const Point& x = exterior_probes[i];
    std::size_t holder = charts.size();
    for (std::size_t n = 0; n < charts.size() && holder == charts.size(); ++n) {
      if (charts[n].covers_domain || distance(x, charts[n].center) < charts[n].radius) holder = n;
    }
    if (holder == charts.size()) continue;
    GlueExterior e;
    e.x = x;
    e.chart = charts[holder].n;
    e.value = potential(k, out.measure, x);
    const auto& near = charts[holder].neighbors;
    for (std::size_t j = 0; j < charts.size(); ++j) {
      if (!out.charts[j]) continue;
      if (std::find(near.begin(), near.end(), static_cast<int>(j)) != near.end()) {
        e.near += out.weights[j] * out.charts[j]->exterior[i].bound;
      } else {
        const double d = distance(x, charts[j].center) - charts[j].radius;
        e.far += out.weights[j] * out.charts[j]->measure.mass() * k.profile(d);
      }
    }
    out.exterior_max = std::max(out.exterior_max, e.value);
    worst = std::min(worst, e.near + e.far - e.value);
    out.exterior.push_back(std::move(e));
  }
  if (!out.exterior.empty()) out.checks.push_back(check_ge("glued exterior margin", worst, 0.0));
  out.checks.push_back(check_le("total mass", out.measure.mass(), 1.0));
  std::vector<Point> all(p_probes.begin(), p_probes.end());
  all.insert(all.end(), exterior_probes.begin(), exterior_probes.end());
  out.checks.push_back(check_true("assembled neighborhoods decrease", assembled_neighborhoods_decrease(P, charts, depth, all)));
  return out;
}

bool assembled_neighborhoods_decrease(const GDeltaSpec& P, const std::vector<Chart>& charts, int depth,
                                      std::span<const Point> probes) {
  std::vector<GDeltaSpec> local;
  for (const auto& c : charts) local.push_back(chart_gdelta(P, c));
  auto in_w = [&](int m, const Point& x) {
    return std::any_of(local.begin(), local.end(), [&](const GDeltaSpec& g) { return contains(g.neighborhood(m), x); });
  };
  for (int m = 1; m < depth; ++m) {
    for (const auto& x : probes) {
      if (in_w(m + 1, x) && !in_w(m, x)) return false;
    }
  }
  return true;
}

}  // namespace polarset
