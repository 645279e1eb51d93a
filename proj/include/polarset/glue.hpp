#pragma once

#include "polarset/choquet.hpp"
#include "polarset/evans.hpp"
#include "polarset/kernel.hpp"

namespace polarset {

/// Open ball chart U_n. neighbors is I_n (0-based chart indices, n included).
struct Chart {
  int n = 0;  // 1-based
  Point center;
  double radius = 0.0;
  std::vector<int> neighbors;
  bool covers_domain = false;  // the whole domain lies in U_n
  TriangleReport triangle;
  std::size_t samples = 0;     // domain samples used for the triangle scan

  SetPtr open() const { return make_set(Ball{center, radius, false}); }
  SetPtr closed() const { return make_set(Ball{center, radius, true}); }
};

struct CoverOptions {
  double spacing = 0.0;       // grid spacing; 0 means 0.8 * radius
  double resolution = 0.0;    // domain sampling; 0 means spacing / 4
  double max_constant = 16.0; // certification bound on the per-chart triangle constant
};

/// Cell-centered grid of open balls over the bounding box of the domain
/// samples, keeping balls that meet the domain. A domain whose bounding box fits
/// in one ball gets a single chart. Throws InputError naming a chart that fails
/// the triangle certification or a domain sample left uncovered.
std::vector<Chart> local_cover(const SetSpec& domain, const KernelSpec& k, double chart_radius,
                               const CoverOptions& opts = {});

/// Chart weights 2^-n normalized to sum 1.
std::vector<double> chart_weights(std::size_t count);

struct GlueEvansResult {
  DiscreteMeasure measure;
  std::vector<double> weights;
  std::vector<std::optional<EvansResult>> charts;  // empty when P misses the chart
  double probe_min = 0.0;
  std::vector<Check> checks;
};

/// nu = sum_n w_n nu_n with nu_n the Evans measure of P intersected with the
/// closed chart (P itself for a chart covering the domain).
GlueEvansResult glue_evans(const KernelSpec& k, const FSigmaSpec& P, const std::vector<Chart>& charts,
                           const EvansOptions& opts);

struct GlueExterior {
  Point x;
  int chart = 0;       // chart n (1-based) holding x
  double value = 0.0;  // G nu(x)
  double near = 0.0;   // sum over I_n of w_k times the chart-k exterior bound
  double far = 0.0;    // sum off I_n of w_k mass_k g(dist(x, U_k))
};

struct GlueChoquetResult {
  DiscreteMeasure measure;
  std::vector<double> weights;
  std::vector<std::optional<ChoquetResult>> charts;
  std::vector<GlueExterior> exterior;
  double p_min = 0.0;
  double exterior_max = 0.0;
  std::vector<Check> checks;
};

/// nu = sum_n w_n nu_n with nu_n the Choquet measure of P clipped to U_n.
GlueChoquetResult glue_choquet(const KernelSpec& k, const GDeltaSpec& P, int depth, std::span<const Point> p_probes,
                               std::span<const Point> P0, std::span<const Point> exterior_probes,
                               const std::vector<Chart>& charts, const ChoquetOptions& opts);

/// W_{m+1} subset W_m on the probes, W_m the union over charts of U_m cap U_n.
bool assembled_neighborhoods_decrease(const GDeltaSpec& P, const std::vector<Chart>& charts, int depth,
                                      std::span<const Point> probes);

}  // namespace polarset
