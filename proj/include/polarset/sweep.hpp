#pragma once

#include "polarset/measures.hpp"

#include <optional>

namespace polarset {

struct ShellBlock {
  Point center;
  DiscreteMeasure part;
};

/// Shell S(A, r) = {y : M r <= dist(A, y) < (M+1) r} split into blocks around
/// centers of A0. Every atom of a block lies within (M+2) r of its center.
struct ShellPartition {
  int shell = 0;
  double radius = 0.0;
  std::vector<ShellBlock> blocks;
};

/// One atom moved onto a center; kept for the geometric-core audit.
struct SweepAssignment {
  Point atom;
  double weight = 0.0;
  Point center;
  double radius = 0.0;
  double distance_to_set = 0.0;
};

struct SweepResult {
  DiscreteMeasure measure;
  std::vector<SweepAssignment> assignments;
  double guaranteed_factor = 1.0;  // G nu >= factor * G mu on A
};

/// 3^-gamma for the (3, 4) shells; (2 + 2/M)^-gamma for (M, M+1) shells.
double sweep_factor(double gamma, double shell_base = 3.0);

/// Centers are taken from A0 in lexicographic order: the first x in A0 (which
/// must lie in A) with |y - x| < (M+2) r. Without A0 each atom goes to its
/// projection onto A.
ShellPartition shell_partition(const SetSpec& A, const std::optional<std::vector<Point>>& A0,
                               const DiscreteMeasure& mu, double r, double shell_base = 3.0);

/// Moves every block of every shell onto its center. Mass is preserved and
/// G nu >= sweep_factor * G mu on A for kernels with g(lambda s) >= lambda^-gamma g(s), lambda >= 1.
SweepResult sweep_off_set(const KernelSpec& k, const SetSpec& A, const std::optional<std::vector<Point>>& A0,
                          const DiscreteMeasure& mu, double shell_base = 3.0);

/// Atoms on A are kept; the rest is swept.
SweepResult sweep_to_closed(const KernelSpec& k, const SetSpec& A, const DiscreteMeasure& mu,
                            const std::optional<std::vector<Point>>& A0 = std::nullopt, double shell_base = 3.0);

/// Each atom moves to the A0 point it coincides with, else to the first A0 point
/// (lexicographic) within 1/n. Throws InputError naming an uncovered atom.
DiscreteMeasure discrete_approximation(const DiscreteMeasure& mu, std::span<const Point> A0, int n);

using Approximant = std::function<DiscreteMeasure(const DiscreteMeasure&, int)>;

struct Refinement {
  int n = 0;
  DiscreteMeasure measure;
  double worst_margin = 0.0;  // min over probes of G mu^(n) - phi
};

struct RefineOptions {
  int n_start = 1;
  int n_max = 1 << 20;
  bool truncated = false;
};

/// Tests n = n_start, 2 n_start, 4 n_start, ... <= n_max and returns the first n
/// with G mu^(n) > phi on every probe. Throws BudgetError with the worst margin
/// otherwise.
Refinement refine_until(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes,
                        std::span<const double> phi, const Approximant& approx, const RefineOptions& opts);
Refinement refine_until(const KernelSpec& k, const DiscreteMeasure& mu, std::span<const Point> probes,
                        std::span<const double> phi, std::span<const Point> A0, const RefineOptions& opts);

}  // namespace polarset
