#pragma once

#include "polarset/capacity.hpp"
#include "polarset/report.hpp"
#include "polarset/sweep.hpp"

namespace polarset {

struct ChoquetOptions {
  double threshold_base = 9.0;        // localization threshold threshold_base^(gamma+1) + 1
  double boundary_tolerance = 1e-9;   // atoms this close to the boundary of V form the boundary part
  double separation = 2 * kMergeTolerance;  // finiteness is certified at probes this far from atoms
  int n_start = 1;
  int n_max = 1 << 20;
  int exhaustion_depth = 64;          // levels of the geometric exhaustions
  int max_extra_levels = 16;          // exterior bounds may need levels past the depth
  SimplexOptions lp;
};

/// Open union of balls B(c_i, r_i) on which a potential provably exceeds a threshold.
struct SuperLevelSet {
  SetPtr set;     // union of open balls
  SetPtr closure; // union of the closed balls
  std::vector<Point> centers;
  std::vector<double> radii;

  bool empty() const { return centers.empty(); }
};

/// {G nu > t} inside `container`: one ball per candidate with G nu > t, of the
/// largest radius r (bisection) with sum_i w_i g(|c - y_i| + r) > t, capped by
/// the interior depth of the container and by 1.
SuperLevelSet super_level_set(const KernelSpec& k, const DiscreteMeasure& nu, double t,
                              std::span<const Point> candidates, const SetSpec& container);

struct ThinningLevel {
  int n = 0;
  int m = 0;                   // V_m chosen for B_n = W_n cap (V minus V_m)
  double delta = 0.0;          // separation lower bound
  double threshold = 0.0;      // 2^-n min(delta^gamma, 1/g(delta))
  double removed_mass = 0.0;   // nu_0(B_n)
  double next_minimum = 0.0;   // min G nu_n over probes in the closure of W_{n+1}
  DiscreteMeasure removed;     // nu_{n-1} - nu_n
};

struct ThinningTrace {
  double M = 0.0;
  DiscreteMeasure initial;
  DiscreteMeasure final_measure;
  ExhaustionSpec v_exhaustion;
  std::vector<ThinningLevel> levels;
};

struct ThinResult {
  DiscreteMeasure measure;
  ThinningTrace trace;
  std::vector<Check> checks;
};

/// nu <= nu0 with G nu > M on the probes of W = {G nu0 > M+1} cap V (W is built
/// from nu0 when not given) and G nu finite off V. Throws BudgetError when no
/// admissible m exists at some level.
ThinResult thin_to_finite(const KernelSpec& k, const SetPtr& V, const DiscreteMeasure& nu0, double M,
                          std::span<const Point> probes, const ChoquetOptions& opts, SetPtr W = nullptr);

/// Per level n: G(nu_{n-1} - nu_n) < 2^-n and G(nu_n - nu) < 2^-n on the
/// probes of V_n, recomputed from the removed blocks.
std::vector<Check> audit_thinning(const KernelSpec& k, const ThinningTrace& trace, std::span<const Point> probes);

struct LocalizeResult {
  SuperLevelSet V;
  DiscreteMeasure measure;
  std::vector<ThinningTrace> traces;
  double swept_mass = 0.0;    // interior sweep part
  double boundary_mass = 0.0; // relocated boundary atoms
  std::vector<Check> checks;
};

/// Measure of mass <= eps carried by the P-probes in V, with G mu > 2 there
/// and G mu finite off V.
LocalizeResult localize(const KernelSpec& k, const SetPtr& U, std::span<const Point> p_probes,
                        const DiscreteMeasure& witness, double eps, std::span<const Point> audit_probes,
                        const ChoquetOptions& opts);

struct ScatterAnnulus {
  int n = 0;
  std::size_t probes = 0;
  double separation = 0.0;
  double budget = 0.0;  // eps_n
  double mass = 0.0;
};

struct ScatterResult {
  SetPtr V;
  std::vector<SuperLevelSet> pieces;
  DiscreteMeasure measure;
  std::vector<DiscreteMeasure> parts;  // mu_n per annulus
  std::vector<ScatterAnnulus> annuli;
  ExhaustionSpec exhaustion;
  std::vector<ThinningTrace> traces;
  std::vector<Check> checks;
};

/// Localizes on the annuli W_{n+1} minus closure(W_{n-1}) of the geometric
/// exhaustion of U with budgets eps_n = 2^-n eps (1 ^ d^gamma).
ScatterResult scatter(const KernelSpec& k, const SetPtr& U, std::span<const Point> p_probes, double eps,
                      std::span<const Point> audit_probes, const ChoquetOptions& opts);

struct CarrierBlock {
  int k = 0;
  std::size_t atoms = 0;
  std::size_t carrier_points = 0;
  int l = 0;  // approximation index for the far-field estimate
  int m = 0;  // approximation index for the block lower bound
  int n = 0;  // index actually used
  double mass = 0.0;
};

struct CarrierResult {
  DiscreteMeasure measure;
  double delta = 0.0;
  ScatterResult scatter;
  std::vector<CarrierBlock> blocks;
  std::vector<Check> checks;
};

/// nu on P0, mass <= 1 ^ eps/2, G nu > 1 on the P-probes and G nu < eps at
/// audit probes outside U.
CarrierResult dense_carrier(const KernelSpec& k, std::span<const Point> p_probes, std::span<const Point> P0,
                            const SetPtr& U, double eps, std::span<const Point> audit_probes,
                            const ChoquetOptions& opts);

struct ExteriorBound {
  Point x;
  int m_x = 0;        // first m with x outside U_m
  double value = 0.0; // G nu^(M)(x)
  double bound = 0.0; // sum_{m < m_x} G nu_m(x) + 2^(1 - m_x)
};

struct ChoquetLevel {
  int m = 0;
  double eps = 0.0;
  double mass = 0.0;
  double p_min = 0.0;  // min G nu_m over P-probes
  std::size_t atoms = 0;
};

struct ChoquetResult {
  DiscreteMeasure measure;
  std::vector<DiscreteMeasure> level_measures;  // nu_m, m = 1..(depth + extra)
  std::vector<ChoquetLevel> levels;
  std::vector<ExteriorBound> exterior;
  double p_min = 0.0;
  double exterior_max = 0.0;
  std::vector<ThinningTrace> traces;
  std::vector<Check> checks;
};

/// nu^(M) = sum_{m <= M} nu_m with nu_m the dense carrier for U_m and eps = 2^-m.
ChoquetResult choquet_measure(const KernelSpec& k, const GDeltaSpec& P, int depth, std::span<const Point> p_probes,
                              std::span<const Point> P0, std::span<const Point> exterior_probes,
                              const ChoquetOptions& opts);

}  // namespace polarset
