#pragma once

#include "polarset/capacity.hpp"
#include "polarset/report.hpp"
#include "polarset/sweep.hpp"

namespace polarset {

struct EvansOptions {
  int depth = 4;             // M: pieces 1..M, divergence level M per piece
  double resolution = 0.05;  // probe spacing on each piece
  double shell_base = 3.0;
  double margin = 1e-3;      // countable variant: witness level 2^m (1 + margin)
  int n_start = 1;
  int n_max = 1 << 16;
  SimplexOptions lp;
};

struct EvansPiece {
  int m = 0;
  std::size_t probes = 0;
  double capacity = 0.0;
  double weight = 0.0;         // 2^-m
  double witness_mass = 0.0;   // mass of nu_m
  double witness_level = 0.0;  // min truncated G(witness) over the piece probes
  double bound = 0.0;          // certified lower bound for G nu^(M) on the piece probes
  double probe_min = 0.0;      // min truncated G nu^(M) over the piece probes
  int refinement_n = 0;        // countable variant only
};

/// Potentials in Evans reports are truncated at the kernel cap: the exact
/// potential is +inf at every atom and cannot show growth in M.
struct EvansResult {
  DiscreteMeasure measure;
  std::vector<EvansPiece> pieces;
  std::vector<Point> probes;  // union of piece probes, piece order
  double probe_min = 0.0;     // min truncated G nu over all probes
  std::vector<Check> checks;
};

/// nu^(M) = sum_{m <= M} 2^-m nu_m, nu_m = sweep of the depth-M null-capacity
/// series of piece A_m onto A_m.
EvansResult evans_measure(const KernelSpec& k, const FSigmaSpec& P, const EvansOptions& opts);

/// As evans_measure but each nu_m has G nu_m > 2^m on the A_m probes and is
/// carried by P0 (moved there with refine_until).
EvansResult evans_on_countable(const KernelSpec& k, const FSigmaSpec& P, std::span<const Point> P0,
                               const EvansOptions& opts);

}  // namespace polarset
